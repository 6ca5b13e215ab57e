// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Python bindings for the main operations: generators, surrogate losses,
// devgrad batch objectives, LLM losses, the hypergrid, training, and verify.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ftb/devgrad.hpp"
#include "ftb/divergence.hpp"
#include "ftb/error.hpp"
#include "ftb/gfn.hpp"
#include "ftb/hypergrid.hpp"
#include "ftb/llm.hpp"
#include "ftb/loss.hpp"
#include "ftb/runner.hpp"
#include "ftb/verify.hpp"

namespace py = pybind11;
using namespace ftb;

PYBIND11_MODULE(_core, m) {
  m.doc() = "f-divergence trajectory balance: losses, devgrad estimators, and "
            "a tabular GFlowNet trainer";
  m.attr("__version__") = "0.1.0";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const config_error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const domain_error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const overflow_error& e) {
      PyErr_SetString(PyExc_OverflowError, e.what());
    } catch (const numeric_error& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    } catch (const error& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  // ---- divergence catalog --------------------------------------------------

  py::class_<DivergenceSpec>(m, "DivergenceSpec")
      .def_property_readonly("name",
                             [](const DivergenceSpec& s) { return divergence_name(s); })
      .def_readonly("alpha", &DivergenceSpec::alpha)
      .def("__repr__", [](const DivergenceSpec& s) {
        return "<ftb.DivergenceSpec '" + divergence_name(s) + "'>";
      });

  m.def(
      "spec",
      [](const std::string& token, std::optional<double> alpha) {
        return parse_divergence(token, alpha);
      },
      py::arg("token"), py::arg("alpha") = std::nullopt,
      "Divergence by name ('reverse_kl', ..., 'alpha:1.5', or 'alpha' with alpha=).");
  m.def("canonicalize", &ftb::canonicalize,
        "Map near-singular alpha specs onto the equivalent named divergence.");
  m.def("named_catalog", []() { return named_catalog(); },
        "The seven named divergences.");
  m.def("full_spec_list", []() { return full_spec_list(); },
        "Named divergences plus alpha at {0, 0.5, 0.75, 1, 1.2, 2}.");
  m.def("strictly_convex_spec_list", []() { return strictly_convex_spec_list(); },
        "Every spec with a strictly convex loss (full list minus total variation).");

  py::class_<GeneratorValue>(m, "GeneratorValue")
      .def_readonly("f", &GeneratorValue::f)
      .def_readonly("f1", &GeneratorValue::f1)
      .def_readonly("f2", &GeneratorValue::f2)
      .def("__repr__", [](const GeneratorValue& g) {
        return "GeneratorValue(f=" + std::to_string(g.f) + ", f1=" + std::to_string(g.f1) +
               ", f2=" + std::to_string(g.f2) + ")";
      });
  m.def("generator_eval", &generator_eval, py::arg("spec"), py::arg("u"),
        "Standardized generator f(u), f'(u), f''(u) at u > 0.");

  py::class_<BackwardGeneratorValue>(m, "BackwardGeneratorValue")
      .def_readonly("h", &BackwardGeneratorValue::h)
      .def_readonly("h1", &BackwardGeneratorValue::h1);
  m.def("backward_generator_eval", &backward_generator_eval, py::arg("spec"), py::arg("u"),
        "Backward generator h(u) and h'(u) = 2 - f'(1/u).");
  m.def("onpolicy_backward_g2", &onpolicy_backward_g2, py::arg("spec"), py::arg("u"),
        "Curvature density f'(u)/u + f''(u) of the on-policy backward objective.");

  // ---- surrogate losses ----------------------------------------------------

  m.def("loss_eval", &loss_eval, py::arg("spec"), py::arg("delta"),
        "L_f(delta) = int_0^delta (f'(e^t) - f'(1)) dt, in closed form.");
  m.def("loss_deriv", &loss_deriv, py::arg("spec"), py::arg("delta"),
        "dL/ddelta = f'(e^delta) - f'(1).");
  m.def("loss_second_deriv", &loss_second_deriv, py::arg("spec"), py::arg("delta"),
        "d2L/ddelta2 = f''(e^delta) e^delta.");
  m.def("loss_numeric", &loss_numeric, py::arg("spec"), py::arg("delta"),
        "Quadrature oracle for the defining integral (tolerance 1e-10).");
  m.def("tempered_loss_eval", &tempered_loss_eval, py::arg("spec"), py::arg("delta"),
        py::arg("beta"), "(1/beta) L_f(beta * delta) for beta > 0.");
  m.def(
      "inverse_generator",
      [](const std::function<double(double)>& deriv, double u) {
        return inverse_generator(deriv, u);
      },
      py::arg("loss_deriv_fn"), py::arg("u"),
      "Standardized generator recovered from a strictly convex loss derivative.");

  // ---- devgrad batch objective ----------------------------------------------

  m.def(
      "estimate_log_z",
      [](const DivergenceSpec& spec, const std::vector<double>& deltas) {
        return estimate_log_z(spec, deltas);
      },
      py::arg("spec"), py::arg("deltas"),
      "argmin_C of the mean batch loss at deltas + C, by closed form per divergence.");
  m.def(
      "gradient_weights",
      [](const DivergenceSpec& spec, const std::vector<double>& deltas) {
        return gradient_weights(spec, deltas);
      },
      py::arg("spec"), py::arg("deltas"),
      "w_i = L'(delta_i + log Z_hat); the weights sum to zero up to roundoff.");

  py::class_<DevGradResult>(m, "DevGradResult")
      .def_readonly("log_z_hat", &DevGradResult::log_z_hat)
      .def_readonly("loss", &DevGradResult::loss)
      .def_readonly("weights", &DevGradResult::weights)
      .def("__repr__", [](const DevGradResult& r) {
        return "DevGradResult(log_z_hat=" + std::to_string(r.log_z_hat) +
               ", loss=" + std::to_string(r.loss) + ", weights=[" +
               std::to_string(r.weights.size()) + "])";
      });
  m.def(
      "devgrad_batch_loss",
      [](const DivergenceSpec& spec, const std::vector<double>& deltas) {
        return devgrad_batch_loss(spec, deltas);
      },
      py::arg("spec"), py::arg("deltas"),
      "Mean batch loss at the estimated normalizer, with per-sample weights.");

  // ---- LLM losses ------------------------------------------------------------

  py::class_<CompletionBatch>(m, "CompletionBatch")
      .def(py::init([](std::vector<double> log_pi, std::vector<double> log_ref,
                       std::vector<double> reward) {
             CompletionBatch b;
             b.log_pi = std::move(log_pi);
             b.log_ref = std::move(log_ref);
             b.reward = std::move(reward);
             return b;
           }),
           py::arg("log_pi"), py::arg("log_ref"), py::arg("reward"))
      .def_readwrite("log_pi", &CompletionBatch::log_pi)
      .def_readwrite("log_ref", &CompletionBatch::log_ref)
      .def_readwrite("reward", &CompletionBatch::reward);

  m.def("delta_from_logprobs", &delta_from_logprobs, py::arg("batch"), py::arg("beta"),
        py::arg("tempered"),
        "Per-completion deviations: tempered beta*(log_pi - log_ref) - r, or "
        "(log_pi - log_ref) - r/beta.");
  m.def("tempered_devgrad_llm", &tempered_devgrad_llm, py::arg("batch"), py::arg("beta"),
        py::arg("spec"), py::arg("kimi_approx") = false,
        "Tempered devgrad objective over a completion batch, divided by beta; "
        "kimi_approx replaces the normalizer by the mean reward (reverse KL only).");

  // ---- hypergrid environment --------------------------------------------------

  py::class_<HypergridEnv>(m, "HypergridEnv")
      .def(py::init<int, int, double>(), py::arg("d"), py::arg("h"), py::arg("r0"))
      .def_property_readonly("d", &HypergridEnv::d)
      .def_property_readonly("h", &HypergridEnv::h)
      .def_property_readonly("r0", &HypergridEnv::r0)
      .def_property_readonly("n_states", &HypergridEnv::n_states)
      .def_property_readonly("terminate_action", &HypergridEnv::terminate_action)
      .def(
          "state_index",
          [](const HypergridEnv& env, const std::vector<int>& coords) {
            return env.state_index(coords);
          },
          py::arg("coords"), "Mixed-radix index of a coordinate tuple.")
      .def("coords_of", &HypergridEnv::coords_of, py::arg("index"),
           "Coordinates of a packed state index.")
      .def("__repr__", [](const HypergridEnv& env) {
        return "HypergridEnv(d=" + std::to_string(env.d()) + ", h=" + std::to_string(env.h()) +
               ", r0=" + std::to_string(env.r0()) + ")";
      });

  m.def(
      "reward",
      [](const HypergridEnv& env, const std::vector<int>& coords) {
        return reward(env, coords);
      },
      py::arg("env"), py::arg("coords"),
      "Plateau-ring reward with sharp mode bumps, plus the r0 background.");
  m.def("exact_target_distribution", &exact_target_distribution, py::arg("env"),
        "Normalized reward distribution over all cells, indexed by state_index.");
  m.def("count_trajectories", &count_trajectories, py::arg("env"),
        "Number of complete trajectories from the origin.");

  // ---- training ---------------------------------------------------------------

  py::class_<PolicyParams>(m, "PolicyParams")
      .def_readonly("forward_logits", &PolicyParams::forward_logits)
      .def_readonly("log_z", &PolicyParams::log_z)
      .def_readonly("backward_logits", &PolicyParams::backward_logits);

  py::class_<MetricsRow>(m, "MetricsRow")
      .def_readonly("step", &MetricsRow::step)
      .def_readonly("trajectories", &MetricsRow::trajectories)
      .def_readonly("loss", &MetricsRow::loss)
      .def_readonly("log_z_estimate", &MetricsRow::log_z_estimate)
      .def_readonly("l1", &MetricsRow::l1)
      .def_readonly("jsd", &MetricsRow::jsd)
      .def_readonly("modes_found", &MetricsRow::modes_found)
      .def("__repr__", [](const MetricsRow& r) {
        return "MetricsRow(step=" + std::to_string(r.step) + ", l1=" + std::to_string(r.l1) +
               ", modes_found=" + std::to_string(r.modes_found) + ")";
      });

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("rows", &RunResult::rows)
      .def_readonly("n_mode_regions", &RunResult::n_mode_regions)
      .def_readonly("trajectories_to_all_modes", &RunResult::trajectories_to_all_modes)
      .def_readonly("params", &RunResult::params);

  m.def(
      "train_run",
      [](const io::ConfigMap& options) { return train_run(train_config_from_map(options)); },
      py::arg("options"), py::call_guard<py::gil_scoped_release>(),
      "Train a tabular GFlowNet from a flat {key: value} option map (string values, "
      "same keys as the CLI config files); metrics every eval_interval steps.");
  m.def("metrics_csv", &metrics_csv, py::arg("rows"),
        "Run metrics as the deterministic CSV the CLI writes.");

  // ---- verify -------------------------------------------------------------------

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("passed", &CheckResult::pass)
      .def_readonly("max_err", &CheckResult::max_err)
      .def_readonly("tolerance", &CheckResult::tolerance)
      .def("__repr__", [](const CheckResult& c) {
        return "CheckResult(name='" + c.name + "', passed=" + (c.pass ? "True" : "False") +
               ", max_err=" + std::to_string(c.max_err) + ")";
      });

  m.def("verify_suite", &verify_suite, py::arg("suite"),
        py::call_guard<py::gil_scoped_release>(),
        "Run a self-check suite: losses, devgrad, gradients, inverse, variance, or all.");
  m.def("report_json", &report_json, py::arg("suite"), py::arg("checks"),
        "Verify results as the JSON report the CLI prints.");
}
