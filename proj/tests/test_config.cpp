#include <doctest.h>

#include "approx.hpp"

#include <filesystem>

#include "surfwave/config.hpp"
#include "surfwave/io.hpp"

using namespace surfwave;

#ifndef SURFWAVE_SOURCE_DIR
#error "SURFWAVE_SOURCE_DIR must be defined"
#endif

namespace {
const std::filesystem::path kSource = SURFWAVE_SOURCE_DIR;
}

TEST_CASE("shipped configuration") {
  const ProjectConfig cfg = load_config(kSource / "configs/default.conf");
  CHECK(cfg.profile.name == "desk");
  CHECK(cfg.solver.cell_size == rel(0.1e-3));
  CHECK(cfg.solver.confinement_kappa == rel(0.553));
  CHECK(cfg.surface.dielectric.eps_r == rel(2.8));
  CHECK(cfg.surface.dielectric.thickness_h == rel(2e-3));
  CHECK(cfg.surface.ground.sigma == rel(3.15e6));
  CHECK(cfg.solver.frequencies().size() == 85);
  CHECK(cfg.analysis.window_low == rel(23e9));
  CHECK(cfg.raytrace.coax_db_per_m < 0.0);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("format and parse round trip") {
  ProjectConfig cfg = load_config(kSource / "configs/default.conf");
  cfg.solver.workers = 3;
  cfg.solver.dft_frequencies = {24e9, 26e9, 28.5e9};
  cfg.raytrace.coax_db_per_m = 1.25;
  cfg.apply_profile(Profile::ci());
  const std::string text = format_config(cfg);
  const ProjectConfig back = parse_config(text, kSource / "configs");
  CHECK(format_config(back) == text);
  CHECK(back.solver.workers == 3);
  CHECK(back.solver.dft_frequencies == cfg.solver.dft_frequencies);
  CHECK(back.profile.name == "ci");
  CHECK(back.solver.cell_size == rel(0.2e-3));
  CHECK(back.raytrace.coax_db_per_m == rel(1.25));
}

TEST_CASE("profiles") {
  CHECK(Profile::named("desk").cell_size == rel(0.1e-3));
  CHECK(Profile::named("ci").tolerance_scale == rel(1.5));
  CHECK_THROWS_AS(Profile::named("fast"), std::invalid_argument);
  ProjectConfig cfg;
  cfg.apply_profile(Profile::ci());
  CHECK(cfg.solver.cell_size == rel(0.2e-3));
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(parse_config("[surface]\nbogus = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[solver]\npml_cells = ten\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[solver]\npml_cells = 4\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[solver]\nprofile = turbo\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[surface]\nground = unobtainium\n"), std::invalid_argument);
  CHECK_THROWS(parse_config("[solver\n"));
  CHECK_THROWS(load_config(kSource / "configs/missing.conf"));
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("50:150:20") == std::vector<double>{50, 70, 90, 110, 130, 150});
  CHECK(parse_number_list("1,2,4") == std::vector<double>{1, 2, 4});
  CHECK(parse_number_list("0") == std::vector<double>{0});
  const auto f = parse_frequency_list("21:42:0.25");
  CHECK(f.size() == 85);
  CHECK(f.front() == rel(21e9));
  CHECK(f.back() == rel(42e9));
  CHECK_THROWS(parse_number_list("3,2"));
  CHECK_THROWS(parse_number_list("1:5:0"));
  CHECK_THROWS(parse_number_list("a,b"));
  CHECK_THROWS(parse_number_list("-1,2"));
  CHECK_THROWS(parse_frequency_list("0,26"));
}

TEST_CASE("formatting helpers") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(26e9)) == 26e9);
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
