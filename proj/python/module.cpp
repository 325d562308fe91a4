#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <memory>
#include <optional>
#include <string>

#include "projcal/correction.hpp"
#include "projcal/dataset.hpp"
#include "projcal/errors.hpp"
#include "projcal/network.hpp"
#include "projcal/policy.hpp"
#include "projcal/run_config.hpp"
#include "projcal/scene.hpp"
#include "projcal/training.hpp"

namespace py = pybind11;
using namespace projcal;

namespace {

using ImageArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

ImageArray to_array(const Image& img) {
  ImageArray out({img.height, img.width, 3});
  std::memcpy(out.mutable_data(), img.pixels.data(), img.pixels.size());
  return out;
}

Image from_array(const ImageArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ConfigError("image: expected an (H, W, 3) uint8 array");
  Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.pixels.data(), a.data(), img.pixels.size());
  return img;
}

std::unique_ptr<Policy> make_policy(const RunConfig& cfg, const std::optional<PolicyWeights>& weights) {
  if (weights) return std::make_unique<LearnedPolicy>(*weights);
  return std::make_unique<AnalyticPolicy>(Calibration{cfg.scene.camera, cfg.scene.plane});
}

}  // namespace

PYBIND11_MODULE(_projcal, m) {
  m.doc() = "Camera-projector extrinsic auto-correction core";

  static py::exception<Error> base(m, "ProjcalError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<CorruptFileError>(m, "CorruptFileError", base.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());
  py::register_exception<SplitError>(m, "SplitError", base.ptr());
  py::register_exception<ShapeMismatchError>(m, "ShapeMismatchError", base.ptr());

  py::class_<OffsetEstimate>(m, "OffsetEstimate")
      .def(py::init<>())
      .def(py::init([](double dx, double dy) { return OffsetEstimate{dx, dy}; }), py::arg("dx"), py::arg("dy"))
      .def_readwrite("dx", &OffsetEstimate::dx)
      .def_readwrite("dy", &OffsetEstimate::dy)
      .def("norm", &OffsetEstimate::norm)
      .def("__repr__", [](const OffsetEstimate& e) {
        return "OffsetEstimate(dx=" + std::to_string(e.dx) + ", dy=" + std::to_string(e.dy) + ")";
      });

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_static("from_json", &RunConfig::from_json_text, py::arg("text"))
      .def_static("load", [](const std::string& p) { return RunConfig::load(p); }, py::arg("path"))
      .def("to_json", &RunConfig::to_json_text)
      .def("validate", &RunConfig::validate)
      .def("set_seed", &RunConfig::set_seed, py::arg("seed"))
      .def_property(
          "n_sequences", [](const RunConfig& c) { return c.gen.n_sequences; },
          [](RunConfig& c, int n) { c.gen.n_sequences = n; })
      .def_property(
          "epochs", [](const RunConfig& c) { return c.train.epochs; }, [](RunConfig& c, int n) { c.train.epochs = n; })
      .def_property(
          "n_trials", [](const RunConfig& c) { return c.evaluate.n_trials; },
          [](RunConfig& c, int n) { c.evaluate.n_trials = n; });

  py::class_<PolicyWeights>(m, "PolicyWeights")
      .def_static("zeros", &PolicyWeights::zeros)
      .def_static("he_init", &PolicyWeights::he_init, py::arg("seed"))
      .def_static("load", [](const std::string& p) { return load_weights(p); }, py::arg("path"))
      .def("save", [](const PolicyWeights& w, const std::string& p) { save_weights(p, w); }, py::arg("path"))
      .def("parameter_count", &PolicyWeights::parameter_count)
      .def("tensor_names", [](const PolicyWeights& w) {
        std::vector<std::string> names;
        for (const Tensor& t : w.tensors) names.push_back(t.name);
        return names;
      })
      .def("__eq__", [](const PolicyWeights& a, const PolicyWeights& b) { return bitwise_equal(a, b); });

  m.def(
      "render",
      [](const RunConfig& cfg, const OffsetEstimate& offset, int threads) {
        cfg.validate();
        return to_array(render_scene(cfg.scene, apply_offset(cfg.scene.true_extrinsics, offset), cfg.gen.resolution,
                                     threads));
      },
      py::arg("config"), py::arg("offset"), py::arg("threads") = 1,
      "Camera view with the projector believed to be off by `offset`; (H, W, 3) uint8.");

  m.def(
      "preprocess",
      [](const ImageArray& a) {
        const InputTensor t = preprocess(from_array(a));
        py::array_t<float> out({kInputChannels, kInputSize, kInputSize});
        std::memcpy(out.mutable_data(), t.data.data(), t.data.size() * sizeof(float));
        return out;
      },
      py::arg("image"));

  m.def(
      "predict", [](const PolicyWeights& w, const ImageArray& a) { return forward(w, preprocess(from_array(a))); },
      py::arg("weights"), py::arg("image"));

  m.def(
      "analytic_estimate",
      [](const RunConfig& cfg, const ImageArray& a) {
        return analytic_estimate(from_array(a), Calibration{cfg.scene.camera, cfg.scene.plane});
      },
      py::arg("config"), py::arg("image"));

  m.def(
      "generate_dataset",
      [](const RunConfig& cfg, const std::string& out_dir, int threads) {
        cfg.validate();
        py::gil_scoped_release release;
        const DatasetManifest mf = generate_dataset(cfg.scene, cfg.gen, out_dir, threads);
        return std::make_pair(mf.split.train, mf.split.test);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("threads") = 1,
      "Writes images and manifest.json; returns (train ids, test ids).");

  m.def(
      "train",
      [](const RunConfig& cfg, const std::string& manifest_path) {
        cfg.validate();
        const DatasetManifest mf = read_manifest(manifest_path);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(mf, std::filesystem::path(manifest_path).parent_path(), cfg.train);
        }
        py::list log;
        for (const EpochLog& e : r.log) log.append(py::make_tuple(e.epoch, e.train_mse, e.test_mse));
        return py::make_tuple(r.weights, log);
      },
      py::arg("config"), py::arg("manifest_path"), "Returns (weights, [(epoch, train_mse, test_mse), ...]).");

  m.def(
      "run_episode",
      [](const RunConfig& cfg, const OffsetEstimate& injected, std::optional<PolicyWeights> weights,
         std::optional<std::string> dump_dir) {
        cfg.validate();
        const auto policy = make_policy(cfg, weights);
        std::optional<std::filesystem::path> dir;
        if (dump_dir) dir = *dump_dir;
        return trace_to_json(run_episode(cfg.scene, cfg.loop, *policy, injected, dir));
      },
      py::arg("config"), py::arg("injected"), py::arg("weights") = py::none(), py::arg("dump_dir") = py::none(),
      "Trace JSON text. Uses the analytic estimator when no weights are given.");

  m.def(
      "evaluate",
      [](const RunConfig& cfg, std::optional<PolicyWeights> weights) {
        cfg.validate();
        const auto policy = make_policy(cfg, weights);
        py::gil_scoped_release release;
        return report_to_json(
            run_evaluation(cfg.scene, cfg.gen, cfg.loop, *policy, cfg.evaluate.n_trials, cfg.evaluate.seed));
      },
      py::arg("config"), py::arg("weights") = py::none(), "Report JSON text.");

  m.attr("__version__") = PROJCAL_VERSION;
}
