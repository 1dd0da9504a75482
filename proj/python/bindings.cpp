#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>

#include "fedcyc/config.hpp"
#include "fedcyc/data.hpp"
#include "fedcyc/dp.hpp"
#include "fedcyc/errors.hpp"
#include "fedcyc/experiment.hpp"
#include "fedcyc/federation.hpp"
#include "fedcyc/metrics.hpp"
#include "fedcyc/models.hpp"
#include "fedcyc/rng.hpp"

namespace py = pybind11;
using namespace fedcyc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

ParamVector flat(const Array& a) {
  std::vector<double> v(a.data(), a.data() + a.size());
  const std::size_t n = v.size();
  return ParamVector{std::move(v), ParamLayout::from_shapes({{"theta", {n}}})};
}

// Images must be (C,H,W); a bare (H,W) array is promoted to one channel.
Tensor to_image(const Array& a) {
  Tensor t = to_tensor(a);
  if (t.dim() == 2) t = t.reshaped({1, t.size(0), t.size(1)});
  return t;
}

PartitionScheme scheme_of(const std::string& name, std::size_t n_clients) {
  return make_scheme(scheme_kind_from_string(name), n_clients);
}

py::dict metrics_dict(const MetricsRecord& m) {
  py::dict d;
  d["round"] = m.round;
  d["direction"] = m.direction;
  d["mae"] = m.mae;
  d["psnr"] = m.psnr;
  d["ssim"] = m.ssim;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fedcyc, m) {
  m.doc() = "Bindings for the federated CycleGAN simulator";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("mae", [](const Array& a, const Array& b) { return mae(to_image(a), to_image(b)); });
  m.def("psnr", [](const Array& a, const Array& b) { return psnr(to_image(a), to_image(b)); });
  m.def("ssim", [](const Array& a, const Array& b) { return ssim(to_image(a), to_image(b)); });

  m.def("clip_gradient", [](const Array& g, double c) { return to_array(clip_gradient(flat(g), c).values); },
        py::arg("grad"), py::arg("clip_bound"));
  m.def(
      "add_noise",
      [](const Array& g, double c, double sigma, std::uint64_t seed) {
        SeededRng rng(seed);
        return to_array(add_noise(flat(g), c, sigma, rng).values);
      },
      py::arg("grad"), py::arg("clip_bound"), py::arg("sigma"), py::arg("seed"));

  m.def(
      "fedavg",
      [](const std::vector<Array>& updates, const std::vector<double>& weights) {
        std::vector<ParamVector> flats;
        for (const auto& u : updates) flats.push_back(flat(u));
        return to_array(fedavg_aggregate(flats, weights).values);
      },
      py::arg("updates"), py::arg("weights"));

  m.def(
      "scheme_proportions",
      [](const std::string& name, std::size_t n_clients) { return scheme_of(name, n_clients).proportions; },
      py::arg("scheme"), py::arg("n_clients"));
  m.def(
      "partition_sizes",
      [](const std::string& name, std::size_t n_clients, std::size_t n) {
        return partition_sizes(scheme_of(name, n_clients), n);
      },
      py::arg("scheme"), py::arg("n_clients"), py::arg("n"));
  m.def(
      "partition",
      [](const std::vector<int>& ids, const std::string& name, std::size_t n_clients, std::uint64_t seed) {
        return partition(ids, scheme_of(name, n_clients), seed);
      },
      py::arg("ids"), py::arg("scheme"), py::arg("n_clients"), py::arg("seed"));

  m.def(
      "synth_dataset",
      [](std::size_t n, std::size_t image_size, std::uint64_t seed) {
        py::list out;
        for (const Sample& s : synth_dataset(n, image_size, seed)) {
          out.append(py::make_tuple(s.id, to_array(s.modality_a), to_array(s.modality_b)));
        }
        return out;
      },
      py::arg("n"), py::arg("image_size"), py::arg("seed"),
      "List of (id, modality_a, modality_b) with images shaped (1, size, size) in [-1, 1].");

  m.def(
      "generator_forward",
      [](const Array& images, std::size_t image_size, const std::vector<std::size_t>& channels,
         std::uint64_t seed) {
        GeneratorConfig cfg;
        cfg.image_size = image_size;
        cfg.channels = channels;
        const Generator g(cfg, seed);
        NoGradGuard ng;
        return to_array(g.forward(to_tensor(images)));
      },
      py::arg("images"), py::arg("image_size") = 32, py::arg("channels") = std::vector<std::size_t>{8, 16, 32},
      py::arg("seed") = 1, "Freshly initialised generator applied to an (N,1,H,W) or (1,H,W) batch.");

  m.def(
      "parse_config", [](const std::string& text) { return to_config_text(parse_config(text)); },
      py::arg("text"), "Validates a config and returns it in canonical key=value form.");

  m.def(
      "run_experiment",
      [](const std::string& text, const std::filesystem::path& output_dir) {
        ExperimentConfig cfg = parse_config(text);
        cfg.output_dir = output_dir;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        py::list metrics;
        for (const auto& rec : r.metrics) metrics.append(metrics_dict(rec));
        return metrics;
      },
      py::arg("config_text"), py::arg("output_dir"));
}
