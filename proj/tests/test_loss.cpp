#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ftb/divergence.hpp"
#include "ftb/error.hpp"
#include "ftb/loss.hpp"

using namespace ftb;

namespace {

const std::vector<double> kDeltaGrid = {-5.0, -2.0, -0.5, 0.5, 1.0, 2.0, 5.0};

const std::vector<DivergenceSpec>& all_specs() {
  static const std::vector<DivergenceSpec> specs = [] {
    std::vector<DivergenceSpec> s = named_catalog();
    for (double a : {-0.5, 0.5, 0.75, 1.2, 2.0, 3.0}) {
      s.push_back(DivergenceSpec::alpha_family(a));
    }
    return s;
  }();
  return specs;
}

}  // namespace

TEST_CASE("loss values match independently computed references") {
  struct Row {
    DivergenceSpec spec;
    std::vector<double> values;  // over kDeltaGrid
  };
  const std::vector<Row> rows = {
      {DivergenceSpec::named(Divergence::reverse_kl),
       {12.5, 2.0, 0.125, 0.125, 0.5, 2.0, 12.5}},
      {DivergenceSpec::named(Divergence::forward_kl),
       {142.41315910257660342, 4.3890560989306502272, 0.14872127070012814685,
        0.1065306597126334236, 0.3678794411714423216, 1.1353352832366126919,
        4.0067379469990854671}},
      {DivergenceSpec::named(Divergence::pearson),
       {4.0067379469990854671, 1.1353352832366126919, 0.1065306597126334236,
        0.14872127070012814685, 0.71828182845904523536, 4.3890560989306502272,
        142.41315910257660342}},
      {DivergenceSpec::named(Divergence::neyman),
       {5503.8664487016791292, 12.39953750828605977, 0.17957045711476130884,
        0.091969860292860580399, 0.28383382080915317297, 0.75457890972218354507,
        2.2500113499824406212}},
      {DivergenceSpec::named(Divergence::hellinger),
       {34.729975842813893752, 2.8731273138361809414, 0.13610166675096593629,
        0.11520313228561947298, 0.42612263885053369442, 1.4715177646857692864,
        6.3283399944955951807}},
      {DivergenceSpec::named(Divergence::jsd),
       {19.700008999493728546, 2.6103203751795976563, 0.13535232629851862472,
        0.11464767370148137528, 0.418656287078568542, 1.3896796248204023437,
        5.2999910005062714539}},
      {DivergenceSpec::alpha_family(0.75),
       {19.845487319389462018, 2.3795403312020503496, 0.13037524906922106926,
        0.11995044135352644584, 0.46081252914247789192, 1.7044905554021347777,
        8.5840767497630416052}},
      {DivergenceSpec::alpha_family(1.2),
       {9.1969860292860580399, 1.7580011508909825186, 0.12093545089898932911,
        0.12927295189119062029, 0.53506895400424584803, 2.2956174410317579456,
        17.957045711476130884}},
      {DivergenceSpec::alpha_family(2.0),
       {4.0067379469990854671, 1.1353352832366126919, 0.1065306597126334236,
        0.14872127070012814685, 0.71828182845904523536, 4.3890560989306502272,
        142.41315910257660342}},
  };
  for (const Row& row : rows) {
    CAPTURE(divergence_name(row.spec));
    for (std::size_t i = 0; i < kDeltaGrid.size(); ++i) {
      CAPTURE(kDeltaGrid[i]);
      CHECK(loss_eval(row.spec, kDeltaGrid[i]) ==
            doctest::Approx(row.values[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("every loss is zero and flat exactly at delta = 0") {
  for (const DivergenceSpec& spec : all_specs()) {
    CAPTURE(divergence_name(spec));
    CHECK(loss_eval(spec, 0.0) == 0.0);
    CHECK(loss_deriv(spec, 0.0) == 0.0);
    CHECK(loss_eval(spec, 0.4) > 0.0);
    CHECK(loss_eval(spec, -0.4) > 0.0);
  }
}

TEST_CASE("closed-form losses agree with the quadrature oracle") {
  for (const DivergenceSpec& spec : all_specs()) {
    CAPTURE(divergence_name(spec));
    for (double d : {-5.0, -2.0, -0.5, 0.0, 0.5, 2.0, 5.0}) {
      CAPTURE(d);
      const double closed = loss_eval(spec, d);
      const double numeric = loss_numeric(spec, d);
      CHECK(std::fabs(closed - numeric) <= 1e-8);
    }
  }
}

TEST_CASE("loss derivatives agree with finite differences") {
  const double h = 1e-6;
  for (const DivergenceSpec& spec : all_specs()) {
    CAPTURE(divergence_name(spec));
    for (double d : {-2.0, -0.7, 0.3, 1.5}) {
      CAPTURE(d);
      const double fd1 = (loss_eval(spec, d + h) - loss_eval(spec, d - h)) / (2 * h);
      CHECK(loss_deriv(spec, d) == doctest::Approx(fd1).epsilon(1e-5));
      if (spec.kind == Divergence::tv) continue;
      const double fd2 = (loss_deriv(spec, d + h) - loss_deriv(spec, d - h)) / (2 * h);
      CHECK(loss_second_deriv(spec, d) == doctest::Approx(fd2).epsilon(1e-5));
      CHECK(loss_second_deriv(spec, d) > 0.0);  // strict convexity
    }
  }
}

TEST_CASE("loss derivative equals the generator derivative identity") {
  // L'(d) = f'(e^d) - f'(1), with f'(1) = 1 by standardization.
  for (const DivergenceSpec& spec : all_specs()) {
    CAPTURE(divergence_name(spec));
    for (double d : {-1.5, -0.2, 0.8, 2.5}) {
      if (spec.kind == Divergence::tv) {
        // The kink at u = 1 makes f'(1) a subgradient choice; the absolute
        // loss uses the symmetric one, so its slope is f'(e^d) unshifted.
        CHECK(loss_deriv(spec, d) == generator_eval(spec, std::exp(d)).f1);
        continue;
      }
      const double expected = generator_eval(spec, std::exp(d)).f1 - 1.0;
      CHECK(loss_deriv(spec, d) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("total variation loss is the absolute value") {
  const DivergenceSpec tv = DivergenceSpec::named(Divergence::tv);
  CHECK(loss_eval(tv, 3.25) == 3.25);
  CHECK(loss_eval(tv, -1.5) == 1.5);
  CHECK(loss_deriv(tv, 2.0) == 1.0);
  CHECK(loss_deriv(tv, -2.0) == -1.0);
  CHECK(loss_deriv(tv, 0.0) == 0.0);
  CHECK(loss_second_deriv(tv, 1.0) == 0.0);
}

TEST_CASE("tempered loss rescales the deviation and the value") {
  for (const DivergenceSpec& spec : all_specs()) {
    CAPTURE(divergence_name(spec));
    for (double beta : {0.25, 1.0, 4.0}) {
      for (double d : {-1.0, 0.3, 2.0}) {
        CHECK(tempered_loss_eval(spec, d, beta) ==
              doctest::Approx(loss_eval(spec, beta * d) / beta).epsilon(1e-14));
      }
    }
  }
  // Reverse KL: (1/beta) * (beta d)^2 / 2 = beta d^2 / 2.
  CHECK(tempered_loss_eval(DivergenceSpec::named(Divergence::reverse_kl), 3.0, 2.0) ==
        doctest::Approx(9.0).epsilon(1e-14));
  CHECK_THROWS_AS(
      tempered_loss_eval(DivergenceSpec::named(Divergence::reverse_kl), 1.0, 0.0),
      domain_error);
  CHECK_THROWS_AS(
      tempered_loss_eval(DivergenceSpec::named(Divergence::reverse_kl), 1.0, -2.0),
      domain_error);
}

TEST_CASE("losses reject non-finite deviations") {
  const DivergenceSpec rkl = DivergenceSpec::named(Divergence::reverse_kl);
  CHECK_THROWS_AS(loss_eval(rkl, std::nan("")), domain_error);
  CHECK_THROWS_AS(loss_deriv(rkl, std::numeric_limits<double>::infinity()), domain_error);
}

TEST_CASE("inverse mapping recovers the generator from the loss derivative") {
  for (const DivergenceSpec& spec : all_specs()) {
    if (spec.kind == Divergence::tv) continue;  // l''(0) = 0: not strictly convex
    CAPTURE(divergence_name(spec));
    const auto deriv = [&spec](double d) { return loss_deriv(spec, d); };
    for (double u : {0.25, 0.7, 1.0, 2.0, 4.5}) {
      CAPTURE(u);
      CHECK(inverse_generator(deriv, u) ==
            doctest::Approx(generator_eval(spec, u).f).epsilon(1e-6));
    }
  }
}

TEST_CASE("inverse mapping sends the squared loss to u log u") {
  const auto squared_deriv = [](double d) { return d; };
  const double e = std::exp(1.0);
  CHECK(inverse_generator(squared_deriv, e) ==
        doctest::Approx(2.7182818284590452354).epsilon(1e-8));
  CHECK(inverse_generator(squared_deriv, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(inverse_generator(squared_deriv, 2.0) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-8));
}

TEST_CASE("inverse mapping rejects non-convex losses") {
  const auto concave = [](double d) { return -d; };
  CHECK_THROWS_AS(inverse_generator(concave, 2.0), domain_error);
  const auto flat = [](double) { return 0.0; };
  CHECK_THROWS_AS(inverse_generator(flat, 2.0), domain_error);
  CHECK_THROWS_AS(inverse_generator([](double d) { return d; }, 0.0), domain_error);
  CHECK_THROWS_AS(inverse_generator([](double d) { return d; }, -1.0), domain_error);
}
