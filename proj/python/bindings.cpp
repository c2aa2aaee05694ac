#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edgepress/harness.hpp"

namespace py = pybind11;
using namespace edgepress;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Image image_from_array(const DoubleArray& arr) {
    if (arr.ndim() != 2) throw py::value_error("expected a 2-D array");
    Image img(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
    const double* src = arr.data();
    std::copy(src, src + img.numel(), img.pix.begin());
    return img;
}

DoubleArray array_from_image(const Image& img) {
    DoubleArray arr({static_cast<py::ssize_t>(img.h), static_cast<py::ssize_t>(img.w)});
    std::copy(img.pix.begin(), img.pix.end(), arr.mutable_data());
    return arr;
}

EdgeMap edges_from_array(const ByteArray& arr) {
    if (arr.ndim() != 2) throw py::value_error("expected a 2-D array");
    EdgeMap map(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
    const std::uint8_t* src = arr.data();
    for (std::size_t i = 0; i < map.mask.size(); ++i) map.mask[i] = src[i] ? 1 : 0;
    return map;
}

ByteArray array_from_edges(const EdgeMap& map) {
    ByteArray arr({static_cast<py::ssize_t>(map.h), static_cast<py::ssize_t>(map.w)});
    std::copy(map.mask.begin(), map.mask.end(), arr.mutable_data());
    return arr;
}

RDCurve curve_from_lists(const std::vector<double>& bpp, const std::vector<double>& psnr,
                         const std::string& label) {
    if (bpp.size() != psnr.size()) throw py::value_error("bpp/psnr length mismatch");
    RDCurve c;
    c.label = label;
    for (std::size_t i = 0; i < bpp.size(); ++i) {
        RDPoint p;
        p.bpp = bpp[i];
        p.psnr = psnr[i];
        c.points.push_back(p);
    }
    c.validate();
    return c;
}

struct PyModel {
    ModelPair pair;

    std::string mode() const { return mode_name(pair.prn.mode); }
    int qf() const { return pair.qf; }
    std::size_t param_count() const { return count_params(pair.prn, pair.pon); }

    DoubleArray prn(const DoubleArray& arr) const {
        const Image img = image_from_array(arr);
        return array_from_image(to_image(prn_forward(pair.prn, to_tensor(img))));
    }
    DoubleArray pon(const DoubleArray& arr) const {
        const Image img = image_from_array(arr);
        return array_from_image(to_image(pon_forward(pair.pon, to_tensor(img))));
    }
    py::tuple roundtrip(const DoubleArray& arr) const {
        const Image img = image_from_array(arr);
        const JpegCodec codec;
        const PipelineResult res = run_pipeline(pair, img, codec);
        py::bytes stream(reinterpret_cast<const char*>(res.stream.bytes.data()),
                         res.stream.bytes.size());
        return py::make_tuple(array_from_image(res.reconstruction), stream);
    }
    void save(const std::string& path) const { save_checkpoint(path, pair); }
};

PyModel train_py(const std::vector<DoubleArray>& images, const std::string& mode, int qf,
                 int epochs, int iterations_per_module, int batch_size, double lr,
                 double alpha, int warmup_epochs, std::uint64_t seed, int features,
                 int blocks) {
    std::vector<TrainingExample> data;
    const CannyConfig ccfg;
    for (const DoubleArray& arr : images) {
        TrainingExample ex;
        ex.image = image_from_array(arr);
        ex.edges = canny(ex.image, ccfg);
        data.push_back(std::move(ex));
    }
    TrainConfig cfg;
    cfg.mode = mode_from_name(mode);
    cfg.qf = qf;
    cfg.epochs = epochs;
    cfg.iterations_per_module = iterations_per_module;
    cfg.batch_size = batch_size;
    cfg.lr = lr;
    cfg.alpha = alpha;
    cfg.warmup_epochs = warmup_epochs;
    cfg.seed = seed;
    cfg.pon_features = features;
    cfg.pon_blocks = blocks;
    const JpegCodec codec;
    const TrainState state = train(data, cfg, codec, nullptr);
    return PyModel{state.models};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "codec-sandwich compression core: JPEG codec, metrics, edge "
              "detection, losses, and the training pipeline";

    // codec
    m.def("jpeg_encode",
          [](const DoubleArray& arr, int qf) {
              const Bitstream bs = jpeg_encode(image_from_array(arr), CodecConfig{qf});
              return py::bytes(reinterpret_cast<const char*>(bs.bytes.data()),
                               bs.bytes.size());
          },
          py::arg("image"), py::arg("qf"),
          "Encode a [0,1] grayscale array as baseline JFIF bytes.");
    m.def("jpeg_decode",
          [](const py::bytes& data) {
              Bitstream bs;
              const std::string_view view = data;
              bs.bytes.assign(view.begin(), view.end());
              return array_from_image(jpeg_decode(bs));
          },
          py::arg("data"));
    m.def("jpeg_reference_roundtrip",
          [](const DoubleArray& arr, int qf) {
              return array_from_image(
                  jpeg_reference_roundtrip(image_from_array(arr), CodecConfig{qf}));
          },
          py::arg("image"), py::arg("qf"),
          "Quantize/dequantize pipeline without entropy coding.");
    m.def("quant_table",
          [](int qf) {
              const QuantTable qt = quant_table_for(qf);
              py::array_t<int> arr({8, 8});
              for (int y = 0; y < 8; ++y)
                  for (int x = 0; x < 8; ++x) arr.mutable_at(y, x) = qt.natural(y, x);
              return arr;
          },
          py::arg("qf"));
    m.def("bits_per_pixel",
          [](std::size_t stream_bytes, int orig_h, int orig_w) {
              Bitstream bs;
              bs.bytes.resize(stream_bytes);
              return bits_per_pixel(bs, orig_h, orig_w);
          },
          py::arg("stream_bytes"), py::arg("orig_h"), py::arg("orig_w"));

    // metrics
    m.def("psnr", [](const DoubleArray& a, const DoubleArray& b) {
        return psnr(image_from_array(a), image_from_array(b));
    });
    m.def("ssim", [](const DoubleArray& a, const DoubleArray& b) {
        return ssim(image_from_array(a), image_from_array(b));
    });
    m.def("ms_ssim", [](const DoubleArray& a, const DoubleArray& b) {
        return ms_ssim(image_from_array(a), image_from_array(b));
    });
    m.def("psnrb",
          [](const DoubleArray& ref, const DoubleArray& test, int block) {
              return psnrb(image_from_array(ref), image_from_array(test), block);
          },
          py::arg("reference"), py::arg("test"), py::arg("block") = 8);
    m.def("miou", [](const ByteArray& a, const ByteArray& b) {
        return miou(edges_from_array(a), edges_from_array(b));
    });
    m.def("bd_psnr",
          [](const std::vector<double>& bpp_a, const std::vector<double>& psnr_a,
             const std::vector<double>& bpp_b, const std::vector<double>& psnr_b) {
              return bd_psnr(curve_from_lists(bpp_a, psnr_a, "a"),
                             curve_from_lists(bpp_b, psnr_b, "b"));
          },
          py::arg("bpp_a"), py::arg("psnr_a"), py::arg("bpp_b"), py::arg("psnr_b"));
    m.def("bd_rate",
          [](const std::vector<double>& bpp_a, const std::vector<double>& psnr_a,
             const std::vector<double>& bpp_b, const std::vector<double>& psnr_b) {
              return bd_rate(curve_from_lists(bpp_a, psnr_a, "a"),
                             curve_from_lists(bpp_b, psnr_b, "b"));
          },
          py::arg("bpp_a"), py::arg("psnr_a"), py::arg("bpp_b"), py::arg("psnr_b"));

    // edges
    m.def("canny",
          [](const DoubleArray& arr, double sigma, double low, double high) {
              CannyConfig cfg;
              cfg.sigma = sigma;
              cfg.low = low;
              cfg.high = high;
              return array_from_edges(canny(image_from_array(arr), cfg));
          },
          py::arg("image"), py::arg("sigma") = 1.4, py::arg("low") = 0.1,
          py::arg("high") = 0.3);
    m.def("edge_density",
          [](const ByteArray& arr) { return edge_density(edges_from_array(arr)); });

    // losses
    m.def("mse_loss",
          [](const DoubleArray& pred, const DoubleArray& target) {
              const Image p = image_from_array(pred), t = image_from_array(target);
              const LossResult res = mse_loss(to_tensor(p), to_tensor(t));
              return py::make_tuple(res.value, array_from_image(to_image(res.grad)));
          },
          py::arg("pred"), py::arg("target"));
    m.def("edge_aware_loss",
          [](const DoubleArray& pred, const DoubleArray& target, const ByteArray& edges,
             double alpha) {
              const Image p = image_from_array(pred), t = image_from_array(target);
              const LossResult res = edge_aware_loss(to_tensor(p), to_tensor(t),
                                                     edges_from_array(edges),
                                                     LossConfig{alpha});
              return py::make_tuple(res.value, array_from_image(to_image(res.grad)));
          },
          py::arg("pred"), py::arg("target"), py::arg("edges"), py::arg("alpha") = 0.75);

    // models + training
    py::class_<PyModel>(m, "Model")
        .def_static(
            "create",
            [](const std::string& mode, int qf, std::uint64_t seed, int features,
               int blocks) {
                return PyModel{make_model_pair(mode_from_name(mode), qf, seed, features,
                                               blocks)};
            },
            py::arg("mode"), py::arg("qf"), py::arg("seed") = 1,
            py::arg("features") = 32, py::arg("blocks") = 4)
        .def_static("load",
                    [](const std::string& path) { return PyModel{load_checkpoint(path)}; })
        .def("save", &PyModel::save)
        .def_property_readonly("mode", &PyModel::mode)
        .def_property_readonly("qf", &PyModel::qf)
        .def_property_readonly("param_count", &PyModel::param_count)
        .def("prn_forward", &PyModel::prn, py::arg("image"),
             "Pre-processing network: image -> latent")
        .def("pon_forward", &PyModel::pon, py::arg("image"),
             "Post-processing network: codec output -> reconstruction")
        .def("roundtrip", &PyModel::roundtrip, py::arg("image"),
             "Full pipeline; returns (reconstruction, jfif_bytes)");

    m.def("train", &train_py, py::arg("images"), py::arg("mode") = "FR",
          py::arg("qf") = 10, py::arg("epochs") = 50,
          py::arg("iterations_per_module") = 5, py::arg("batch_size") = 10,
          py::arg("lr") = 1e-3, py::arg("alpha") = 0.75, py::arg("warmup_epochs") = 5,
          py::arg("seed") = 1, py::arg("features") = 32, py::arg("blocks") = 4,
          "Progressive training on a list of [0,1] grayscale arrays.");
}
