#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netrel/errors.hpp"
#include "netrel/io.hpp"
#include "netrel/learner.hpp"
#include "netrel/signature.hpp"

namespace py = pybind11;
using namespace netrel;

namespace {

struct Estimate {
  SignatureTable table;
  ReliabilityCurve curve;
};

std::vector<double> grid_for(const NetworkFile& f, std::size_t points) {
  return default_grid(f.network, f.distributions, points);
}

Estimate finish(const NetworkFile& f, SignatureTable table, std::size_t points) {
  auto curve = reliability(table, f.distributions, grid_for(f, points));
  return {std::move(table), std::move(curve)};
}

py::dict learner_dict(const NetworkFile& f, LearnerResult r, std::size_t points) {
  py::dict d;
  d["reliability"] = reliability(r.table, f.distributions, grid_for(f, points));
  d["audit"] = py::module_::import("json").attr("loads")(audit_json(r.audit));
  d["model"] = forest_json(r.forest, f.network);
  d["signature"] = std::move(r.table);
  return d;
}

}  // namespace

PYBIND11_MODULE(_netrel, m) {
  m.doc() = "Two-terminal network reliability via survival signatures.";

  static py::exception<Error> error(m, "NetrelError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<NetworkFile>(m, "Network")
      .def_property_readonly("name", [](const NetworkFile& f) { return f.network.name(); })
      .def_property_readonly("component_count",
                             [](const NetworkFile& f) { return f.network.component_count(); })
      .def_property_readonly("node_count", [](const NetworkFile& f) { return f.network.node_count(); })
      .def_property_readonly("edge_count", [](const NetworkFile& f) { return f.network.edge_count(); })
      .def_property_readonly("class_sizes", [](const NetworkFile& f) {
        auto s = f.network.class_sizes();
        return std::vector<std::size_t>(s.begin(), s.end());
      })
      .def_property_readonly("component_ids", [](const NetworkFile& f) {
        std::vector<std::string> ids;
        for (std::size_t c = 0; c < f.network.component_count(); ++c) ids.push_back(f.network.component_id(c));
        return ids;
      })
      .def("validate", [](const NetworkFile& f) { return validate(f.network).violations; })
      .def("structure_function",
           [](const NetworkFile& f, const std::string& bits) {
             return structure_function(f.network, StateVector::from_string(bits));
           })
      .def("to_json", [](const NetworkFile& f) { return dump_network(f); })
      .def("__repr__", [](const NetworkFile& f) {
        return "<Network '" + f.network.name() + "' M=" + std::to_string(f.network.component_count()) + ">";
      });

  py::class_<SignatureTable>(m, "SignatureTable")
      .def("__len__", &SignatureTable::size)
      .def_property_readonly("class_sizes", [](const SignatureTable& t) {
        return std::vector<std::size_t>(t.class_sizes().begin(), t.class_sizes().end());
      })
      .def_property_readonly("exact",
                             [](const SignatureTable& t) { return t.provenance() == Provenance::Exact; })
      .def("phi", [](const SignatureTable& t, std::vector<std::size_t> key) {
        return t.phi(CombinationKey{std::move(key)});
      })
      .def("rows", [](const SignatureTable& t) {
        py::list rows;
        for (std::size_t i = 0; i < t.size(); ++i) {
          const auto& e = t.entry(i);
          rows.append(py::make_tuple(t.key_of(i).counts, e.n_surv, e.n_fail, e.phi, e.filled));
        }
        return rows;
      });

  py::class_<ReliabilityCurve>(m, "ReliabilityCurve")
      .def_readonly("t", &ReliabilityCurve::grid)
      .def_readonly("R", &ReliabilityCurve::values);

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("signature", &Estimate::table)
      .def_readonly("reliability", &Estimate::curve);

  m.def("load_network", [](const std::string& path) { return load_network(path); }, py::arg("path"));
  m.def("parse_network", [](const std::string& text) { return parse_network(text); }, py::arg("text"));

  m.def("default_grid", &grid_for, py::arg("network"), py::arg("points") = kDefaultGridPoints);

  m.def("reliability",
        [](const NetworkFile& f, const SignatureTable& t, const std::vector<double>& grid) {
          return reliability(t, f.distributions, grid);
        },
        py::arg("network"), py::arg("signature"), py::arg("grid"));

  m.def("relative_error",
        [](const ReliabilityCurve& truth, const ReliabilityCurve& approx, double floor) {
          const auto re = relative_error(truth, approx, floor);
          return py::make_tuple(re.max, re.pointwise);
        },
        py::arg("truth"), py::arg("approx"), py::arg("floor") = kRelativeErrorFloor);

  m.def("exact",
        [](const NetworkFile& f, std::size_t limit, std::size_t points, unsigned threads) {
          require_valid(f.network);
          py::gil_scoped_release release;
          return finish(f, exact_signature(f.network, limit, threads), points);
        },
        py::arg("network"), py::arg("limit") = kDefaultExactLimit,
        py::arg("grid_points") = kDefaultGridPoints, py::arg("threads") = 0);

  m.def("mc_kst",
        [](const NetworkFile& f, std::size_t samples, std::uint64_t seed, std::size_t points,
           unsigned threads) {
          require_valid(f.network);
          py::gil_scoped_release release;
          const auto pool = sample_pool(f.network, f.distributions, samples, seed, threads);
          return finish(f, mc_kst(f.network, pool, threads), points);
        },
        py::arg("network"), py::arg("samples") = 10000, py::arg("seed") = 0,
        py::arg("grid_points") = kDefaultGridPoints, py::arg("threads") = 0);

  m.def("al_kst",
        [](const NetworkFile& f, std::size_t pool_size, std::uint64_t seed, double delta,
           std::size_t n_ini, std::size_t n_add, std::size_t ntree, std::size_t mtry,
           std::size_t points, unsigned threads) {
          LearnerConfig cfg;
          cfg.seed = seed;
          cfg.delta = delta;
          cfg.n_ini = n_ini;
          cfg.n_add = n_add;
          cfg.ntree = ntree;
          cfg.mtry = mtry;
          cfg.threads = threads;
          LearnerResult r;
          {
            py::gil_scoped_release release;
            const auto pool = sample_pool(f.network, f.distributions, pool_size, seed, threads);
            r = run_al_kst(f.network, pool, cfg);
          }
          return learner_dict(f, std::move(r), points);
        },
        py::arg("network"), py::arg("pool") = 10000, py::arg("seed") = 0, py::arg("delta") = 0.005,
        py::arg("n_ini") = 0, py::arg("n_add") = 0, py::arg("ntree") = 100, py::arg("mtry") = 0,
        py::arg("grid_points") = kDefaultGridPoints, py::arg("threads") = 0);

  m.def("rf_kst",
        [](const NetworkFile& f, std::size_t pool_size, std::size_t n_train, std::uint64_t seed,
           std::size_t ntree, std::size_t points, unsigned threads) {
          LearnerConfig cfg;
          cfg.seed = seed;
          cfg.ntree = ntree;
          cfg.threads = threads;
          LearnerResult r;
          {
            py::gil_scoped_release release;
            const auto pool = sample_pool(f.network, f.distributions, pool_size, seed, threads);
            r = run_rf_kst(f.network, pool, cfg, n_train);
          }
          return learner_dict(f, std::move(r), points);
        },
        py::arg("network"), py::arg("pool"), py::arg("train"), py::arg("seed") = 0,
        py::arg("ntree") = 100, py::arg("grid_points") = kDefaultGridPoints, py::arg("threads") = 0);

  m.def("predict_variant",
        [](const NetworkFile& f, const std::string& model, const std::vector<std::string>& remove,
           std::size_t pool_size, std::uint64_t seed, std::size_t points, unsigned threads) {
          const auto forest = parse_forest_json(model, f.network);
          const auto variant = derive_variant(f.network, std::span<const std::string>(remove));
          py::gil_scoped_release release;
          const auto pool = sample_pool(variant.network, f.distributions, pool_size, seed, threads);
          const auto grid = default_grid(variant.network, f.distributions, points);
          auto table = variant_signature(f.network, forest, variant, pool, threads);
          auto curve = reliability(table, f.distributions, grid);
          return Estimate{std::move(table), std::move(curve)};
        },
        py::arg("network"), py::arg("model"), py::arg("remove"), py::arg("pool") = 10000,
        py::arg("seed") = 0, py::arg("grid_points") = kDefaultGridPoints, py::arg("threads") = 0);

  m.attr("__version__") = std::string(kVersion);
}
