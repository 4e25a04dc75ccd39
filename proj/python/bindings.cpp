#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hqfno/config.hpp"
#include "hqfno/diag.hpp"
#include "hqfno/errors.hpp"
#include "hqfno/metrics.hpp"
#include "hqfno/model.hpp"
#include "hqfno/synthdata.hpp"

namespace py = pybind11;
using namespace hqfno;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const RealTensor& t) {
  Array a(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(t.storage().begin(), t.storage().end(), a.mutable_data());
  return a;
}

Array field_array(const std::vector<double>& v, const synthdata::GridSpec& g) {
  Array a({static_cast<py::ssize_t>(g.nx), static_cast<py::ssize_t>(g.ny),
           static_cast<py::ssize_t>(g.nz)});
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::vector<double> flat(const Array& a) { return {a.data(), a.data() + a.size()}; }

model::ModelConfig model_config(const std::string& text) {
  auto run = config::parse_run_config(config::json::parse(R"({"model":)" + text + "}"));
  return run.model;
}

}  // namespace

PYBIND11_MODULE(_hqfno, m) {
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<LoadError>(m, "LoadError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("resolve_config", [](const std::string& text) {
    return config::to_json(config::parse_run_config(config::json::parse(text))).dump();
  });

  m.def("count_params", [](const std::string& model_json) {
    const auto b = model::count_params(model_config(model_json));
    return py::dict(py::arg("spectral_per_layer") = b.spectral_per_layer,
                    py::arg("quantum_per_layer") = b.quantum_per_layer,
                    py::arg("spectral_branch") = b.spectral_branch(),
                    py::arg("pointwise") = b.pointwise, py::arg("lifting") = b.lifting,
                    py::arg("decoder") = b.decoder, py::arg("total") = b.total,
                    py::arg("enumerated_total") = b.enumerated_total);
  });

  m.def("h_star", [](double p, double v) { return synthdata::h_star(p, v, {}); });
  m.def("speed_for", [](double h, double p) { return synthdata::speed_for(h, p, {}); });

  m.def("generate_fields", [](double power, double speed, std::size_t nx, std::size_t ny,
                              std::size_t nz) {
    synthdata::GridSpec g;
    g.nx = nx;
    g.ny = ny;
    g.nz = nz;
    const synthdata::MaterialConstants mat;
    const synthdata::ProcessPoint pt{power, speed, synthdata::h_star(power, speed, mat)};
    const auto s = synthdata::generate_fields(pt, g, mat);
    return py::make_tuple(field_array(s.temperature, g), field_array(s.alpha, g));
  });

  m.def("field_errors", [](const Array& pred, const Array& ref) {
    const auto e = metrics::field_errors(flat(pred), flat(ref));
    return py::make_tuple(e.mae, e.rmse);
  });
  m.def("iou", [](const Array& pred, const Array& ref, double tau) {
    return metrics::iou(flat(pred), flat(ref), tau);
  }, py::arg("pred"), py::arg("ref"), py::arg("tau") = 0.5);

  m.def("fim_eigenvalues", [](int n_qubits, int depth, int thetas, int data, std::uint64_t seed) {
    const auto fam = n_qubits == 0 ? diag::single_rx_family() : diag::mixer_family(n_qubits, depth);
    return diag::estimate_fim(fam, thetas, data, seed, depth).eigenvalues;
  });
  m.def("fourier_support", [](int n_qubits, int encodings, int grid, std::uint64_t seed) {
    const auto r = diag::fourier_spectrum_random(n_qubits, encodings, 2, grid, seed);
    std::vector<int> support;
    for (std::size_t i = 0; i < r.frequencies.size(); ++i) {
      if (std::abs(r.coefficients[i]) > r.tolerance) support.push_back(r.frequencies[i]);
    }
    return support;
  });

  py::class_<model::ModelParams>(m, "Model")
      .def_static("random", [](const std::string& model_json, std::uint64_t seed) {
        return model::ModelParams::random(model_config(model_json), seed);
      })
      .def_static("load", [](const std::string& path) { return model::load_checkpoint_file(path); })
      .def("save", [](model::ModelParams& p, const std::string& path) {
        model::save_checkpoint_file(p, path);
      })
      .def("config", [](const model::ModelParams& p) { return config::to_json(p.config).dump(); })
      .def("trainable_count", &model::ModelParams::trainable_count)
      .def("predict", [](const model::ModelParams& p, const Array& input) {
        RealTensor x(std::vector<std::size_t>(input.shape(), input.shape() + input.ndim()));
        std::copy(input.data(), input.data() + input.size(), x.storage().begin());
        const auto out = model::forward(p, x);
        return py::make_tuple(to_array(out.temperature), to_array(out.alpha));
      })
      .def("make_input", [](const model::ModelParams& p, double power, double speed, std::size_t nx,
                            std::size_t ny, std::size_t nz) {
        synthdata::GridSpec g;
        g.nx = nx;
        g.ny = ny;
        g.nz = nz;
        const synthdata::MaterialConstants mat;
        const synthdata::ProcessPoint pt{power, speed, synthdata::h_star(power, speed, mat)};
        return to_array(synthdata::make_input(pt, g, p.config.inputs));
      });
}
