#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "depbench/datagen.hpp"
#include "depbench/util.hpp"

using namespace depbench;
using datagen::Marginal;
using datagen::NoisePlacement;

TEST_CASE("model labels round-trip") {
  for (const char* text : {"E_fX[Ny]", "E_X[Nx,Ny]", "U_fX[Nx]", "U_X[Ny]"}) {
    auto model = datagen::parse_model(text);
    CHECK(model.label() == text);
  }
  CHECK(datagen::parse_model("E_fX[NxNy]").label() == "E_fX[Nx,Ny]");
  CHECK_THROWS_AS(datagen::parse_model("Q_X[Ny]"), Error);
  CHECK_THROWS_AS(datagen::parse_model("E_X[Nz]"), Error);
}

TEST_CASE("suite sizes follow the exclusion rule") {
  auto curve_y = datagen::parse_model("E_fX[Ny]");
  CHECK(datagen::suite("equitability", curve_y).size() == 21);
  auto xnoise = datagen::parse_model("U_X[Nx,Ny]");
  CHECK(datagen::suite("equitability", xnoise).size() == 16);
  // x noise alone, or a non-curve marginal alone, triggers the exclusion
  CHECK(datagen::suite("equitability", datagen::parse_model("E_fX[Nx,Ny]")).size() == 16);
  CHECK(datagen::suite("equitability", datagen::parse_model("E_X[Ny]")).size() == 16);
  for (const char* m : {"U_X[Ny]", "E_fX[Nx]", "U_fX[Ny]"}) {
    auto suite = datagen::suite("equitability", datagen::parse_model(m));
    CHECK((suite.size() == 16 || suite.size() == 21));
  }
  CHECK(datagen::suite("power", curve_y).size() == 8);
  CHECK(datagen::suite("power", xnoise).size() == 8);
  CHECK_THROWS_AS(datagen::suite("other", curve_y), Error);
}

TEST_CASE("even-x sampling with zero noise hits the grid exactly") {
  auto fns = datagen::equitability_functions();
  const auto& line = datagen::find_function(fns, "line");
  datagen::RelationshipInstance inst;
  inst.function = line;
  inst.model = datagen::parse_model("E_X[Ny]");
  auto s = datagen::sample(inst, 3, 99);
  CHECK(s.xs == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(s.ys == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("sampling is deterministic given the seed") {
  auto fns = datagen::equitability_functions();
  auto inst = datagen::instance_for_r2(datagen::find_function(fns, "parabola"),
                                       datagen::parse_model("U_X[Ny]"), 0.4);
  auto a = datagen::sample(inst, 200, 1234);
  auto b = datagen::sample(inst, 200, 1234);
  CHECK(a.xs == b.xs);
  CHECK(a.ys == b.ys);
  auto c = datagen::sample(inst, 200, 1235);
  CHECK(a.ys != c.ys);
}

TEST_CASE("arc-length sampling on the line equals even-x sampling") {
  auto fns = datagen::equitability_functions();
  const auto& line = datagen::find_function(fns, "line");
  datagen::RelationshipInstance even_curve;
  even_curve.function = line;
  even_curve.model = datagen::parse_model("E_fX[Ny]");
  datagen::RelationshipInstance even_x = even_curve;
  even_x.model = datagen::parse_model("E_X[Ny]");
  auto a = datagen::sample(even_curve, 41, 5);
  auto b = datagen::sample(even_x, 41, 5);
  for (int i = 0; i < 41; ++i) CHECK(a.xs[i] == Catch::Approx(b.xs[i]).margin(1e-9));
}

TEST_CASE("sigma_for_r2 closed form") {
  auto fns = datagen::equitability_functions();
  const auto& line = datagen::find_function(fns, "line");
  // var of the uniform on [0,1] is 1/12
  CHECK(datagen::sigma_for_r2(line, Marginal::even_x, 0.5) ==
        Catch::Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-4));
  CHECK(datagen::sigma_for_r2(line, Marginal::even_x, 1.0) == 0.0);
  CHECK_THROWS_AS(datagen::sigma_for_r2(line, Marginal::even_x, 0.0), Error);
}

TEST_CASE("population r2 basics") {
  auto fns = datagen::equitability_functions();
  const auto& parab = datagen::find_function(fns, "parabola");
  auto noiseless = datagen::instance_for_r2(parab, datagen::parse_model("E_fX[Ny]"), 1.0);
  CHECK(datagen::population_r2(noiseless) == 1.0);
  auto noisy = datagen::instance_for_r2(parab, datagen::parse_model("E_fX[Ny]"), 0.3);
  CHECK(datagen::population_r2(noisy) == Catch::Approx(0.3).margin(0.01));
  auto pure = datagen::instance_for_r2(parab, datagen::parse_model("E_fX[Ny]"), 0.0);
  CHECK(datagen::population_r2(pure) == 0.0);
}

TEST_CASE("closed-form sigma reproduces targets across several functions") {
  auto model = datagen::parse_model("E_fX[Ny]");
  auto fns = datagen::suite("equitability", model);
  for (const char* id : {"line", "sine_low_freq", "exp_2x", "spike", "cubic"}) {
    for (double target : {0.3, 0.7}) {
      auto inst = datagen::instance_for_r2(datagen::find_function(fns, id), model, target);
      CHECK(datagen::population_r2(inst) == Catch::Approx(target).margin(0.01));
    }
  }
}

TEST_CASE("calibration agrees with the closed form under y-only noise") {
  auto fns = datagen::equitability_functions();
  const auto& parab = datagen::find_function(fns, "parabola");
  auto model = datagen::parse_model("E_fX[Ny]");
  auto cal = datagen::calibrate_noise(parab, model, 0.5);
  double closed = datagen::sigma_for_r2(parab, model.marginal, 0.5) /
                  datagen::detail::sd_y_noise_scale(parab, model.marginal);
  CHECK(cal.sigma_x == 0.0);
  CHECK(cal.sigma_y == Catch::Approx(closed).epsilon(0.02));
}

TEST_CASE("calibration reaches the target under x-and-y noise") {
  auto fns = datagen::equitability_functions();
  const auto& parab = datagen::find_function(fns, "parabola");
  auto model = datagen::parse_model("E_X[Nx,Ny]");
  auto cal = datagen::calibrate_noise(parab, model, 0.5);
  CHECK(cal.sigma_x == cal.sigma_y);  // i.i.d. placement
  // fresh large sample: squared correlation of f(x+eps) with y
  datagen::RelationshipInstance inst;
  inst.function = parab;
  inst.model = model;
  inst.sigma_x = cal.sigma_x;
  inst.sigma_y = cal.sigma_y;
  CHECK(datagen::population_r2(inst) == Catch::Approx(0.5).margin(0.01));

  auto trivial = datagen::calibrate_noise(parab, model, 1.0);
  CHECK(trivial.sigma_x == 0.0);
  CHECK(trivial.sigma_y == 0.0);
  CHECK_THROWS_AS(datagen::calibrate_noise(parab, model, 0.0), Error);
}

TEST_CASE("circle r2 and its per-half oracle") {
  auto fns = datagen::power_functions();
  const auto& circle = datagen::find_function(fns, "circle");
  CHECK(datagen::circle_r2(circle, 0.0) == 1.0);

  // oracle: treat the upper half as its own noisy functional relationship
  double sigma = 0.6;
  const auto& info = datagen::detail::curve_info(circle);
  double raw = sigma * info.sd_y_full;
  const int n = 200000;
  std::vector<double> f(n), noisy(n);
  rng::Xoshiro256 gen(31);
  for (int i = 0; i < n; ++i) {
    double x = (i + 0.5) / n;
    f[i] = circle.f(x);
    noisy[i] = f[i] + raw * gen.normal();
  }
  double c = util::correlation(f, noisy);
  CHECK(datagen::circle_r2(circle, sigma) == Catch::Approx(c * c).margin(0.01));

  // routing: population_r2 on a circle instance delegates to circle_r2
  datagen::RelationshipInstance inst;
  inst.function = circle;
  inst.model = datagen::parse_model("U_X[Ny]");
  inst.sigma_y = sigma;
  CHECK(datagen::population_r2(inst) ==
        Catch::Approx(datagen::circle_r2(circle, sigma)).epsilon(1e-12));
}

TEST_CASE("circle sampling uses both branches") {
  auto fns = datagen::power_functions();
  auto inst = datagen::instance_for_r2(datagen::find_function(fns, "circle"),
                                       datagen::parse_model("U_X[Ny]"), 1.0);
  auto s = datagen::sample(inst, 400, 17);
  int above = 0, below = 0;
  for (double y : s.ys) (y >= 0 ? above : below)++;
  CHECK(above > 100);
  CHECK(below > 100);
}

TEST_CASE("power grid spans R2 one down to 10^-2.5 in log steps") {
  auto grid = datagen::NoiseGrid::power(100);
  REQUIRE(grid.r2_values.size() == 100);
  CHECK(grid.r2_values.front() == 1.0);
  CHECK(grid.r2_values.back() == Catch::Approx(std::pow(10.0, -2.5)).epsilon(1e-12));
  for (std::size_t i = 1; i < grid.r2_values.size(); ++i)
    CHECK(grid.r2_values[i] < grid.r2_values[i - 1]);
}

TEST_CASE("equitability grid is even on [0,1]") {
  auto grid = datagen::NoiseGrid::equitability(41);
  REQUIRE(grid.r2_values.size() == 41);
  CHECK(grid.r2_values.front() == 0.0);
  CHECK(grid.r2_values.back() == 1.0);
  CHECK(grid.r2_values[1] == Catch::Approx(0.025));
}

TEST_CASE("pure-noise instances are independent with preserved clean marginals") {
  auto fns = datagen::equitability_functions();
  auto inst = datagen::instance_for_r2(datagen::find_function(fns, "line"),
                                       datagen::parse_model("E_X[Ny]"), 0.0);
  auto s = datagen::sample(inst, 1000, 3);
  // x marginal stays the even grid; y is fresh noise
  CHECK(s.xs[0] == 0.0);
  CHECK(s.xs[999] == 1.0);
  CHECK(std::abs(util::correlation(s.xs, s.ys)) < 0.1);
}
