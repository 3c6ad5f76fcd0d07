#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgh/cli.hpp"

using namespace sgh;
namespace fs = std::filesystem;

namespace {

const fs::path fixtures = fs::path(SGH_SOURCE_DIR) / "tests" / "fixtures";

io::json small_config() { return io::read_json((fixtures / "small_disk.json").string()); }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sgh_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const io::json& j) {
  const auto p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "sgh");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

}  // namespace

TEST(Config, ParsesFixture) {
  const auto c = io::parse_config(small_config());
  EXPECT_EQ(c.name, "small_disk");
  EXPECT_EQ(c.resolution, 16);
  EXPECT_EQ(c.geometry.dimension, 2);
  EXPECT_EQ(std::get<Disk>(c.geometry.shape).radius, 0.45);
  EXPECT_EQ(c.materials[1].youngs_modulus, 35.9);
  EXPECT_EQ(c.solver.tolerance, 1e-12);
  EXPECT_EQ(c.verify.states, 5);
  EXPECT_EQ(c.verify.stack_resolution, 16);
  EXPECT_TRUE(c.density_weighting);
}

TEST(Config, RejectsBadInput) {
  auto expect_error = [](const io::json& j, const std::string& fragment) {
    try {
      io::parse_config(j);
      ADD_FAILURE() << "accepted: " << j.dump();
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  auto j = small_config();
  j["speling"] = 1;
  expect_error(j, "speling");
  j = small_config();
  j["solver"]["tolerence"] = 1e-8;
  expect_error(j, "solver.tolerence");
  j = small_config();
  j["dimension"] = 4;
  expect_error(j, "dimension");
  j = small_config();
  j["resolution"] = 2;
  expect_error(j, "resolution");
  j = small_config();
  j["geometry"]["shape"] = "torus";
  expect_error(j, "torus");
  j = small_config();
  j.erase("materials");
  expect_error(j, "materials");
  j = small_config();
  j["verify"]["stack_repeats"] = {4};
  expect_error(j, "stack_repeats");
  j = small_config();
  j["voigt_ordering"] = "lexicographic";
  j["dimension"] = 3;
  j["geometry"] = {{"shape", "sphere"}, {"radius", 0.3}};
  expect_error(j, "lexicographic");
}

TEST(Config, InvalidMaterialNamesThePhase) {
  auto j = small_config();
  j["materials"]["inclusion"]["poisson_ratio"] = 0.5;
  try {
    io::parse_config(j);
    ADD_FAILURE();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("materials.inclusion"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("incompressible"), std::string::npos);
  }
}

TEST(Config, MissingFileAndBadJson) {
  EXPECT_THROW(io::load_config("/nonexistent/config.json"), ConfigError);
  const auto dir = scratch("badjson");
  std::ofstream(dir / "bad.json") << "{\"name\": ";
  EXPECT_THROW(io::load_config((dir / "bad.json").string()), ConfigError);
}

TEST(Result, TensorRoundTripIsBitExact) {
  const auto cfg = io::parse_config(small_config());
  auto g = cfg.geometry;
  g.offset = {0.03, -0.02, 0.0};
  const auto t = homogenize(voxelize(g, 16, cfg.materials)).tensors;
  const auto text = io::tensors_to_json(t).dump();
  const auto back = io::tensors_from_json(io::json::parse(text));
  EXPECT_TRUE(back == t);
}

TEST(Result, MalformedTensorsRejected) {
  io::json j = {{"dimension", 2}};
  EXPECT_THROW(io::tensors_from_json(j), std::exception);
  const auto t = homogenize(voxelize(io::parse_config(small_config()).geometry, 8,
                                     io::parse_config(small_config()).materials))
                     .tensors;
  auto doc = io::tensors_to_json(t);
  doc["D"]["data"].erase(0);
  EXPECT_THROW(io::tensors_from_json(doc), ConfigError);
}

TEST(Cli, HomogenizeWritesDocument) {
  const auto dir = scratch("homogenize");
  std::string out;
  const int rc = run_cli({"homogenize", "--config", (fixtures / "small_disk.json").string(), "--out", dir.string(),
                          "--dump-correctors"},
                         &out);
  ASSERT_EQ(rc, cli::ok) << out;
  const auto doc = io::read_json((dir / "small_disk.json").string());
  EXPECT_EQ(doc["symmetry"]["class"], "cubic");
  EXPECT_TRUE(doc["definiteness"]["positive"].get<bool>());
  EXPECT_EQ(doc["voigt"]["gradient_labels"][1], "221");
  EXPECT_EQ(doc["voigt"]["D_N"].size(), 6u);
  EXPECT_TRUE(fs::exists(dir / "small_disk_correctors.csv"));
  std::ifstream csv(dir / "small_disk_correctors.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("x,y,", 0), 0u);
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, 256u);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  EXPECT_EQ(run_cli({"homogenize", "--config", (dir / "missing.json").string()}), cli::config_error);
  EXPECT_EQ(run_cli({"homogenize"}), cli::config_error);
  EXPECT_EQ(run_cli({"frobnicate", "--config", "x"}), cli::config_error);

  auto j = small_config();
  j["materials"]["matrix"]["youngs_modulus"] = -1.0;
  EXPECT_EQ(run_cli({"homogenize", "--config", write_config(dir, j).string(), "--out", dir.string()}),
            cli::config_error);

  j = small_config();
  j["geometry"]["radius"] = 0.7;
  EXPECT_EQ(run_cli({"homogenize", "--config", write_config(dir, j).string(), "--out", dir.string()}),
            cli::config_error);

  j = small_config();
  j["solver"]["max_iterations"] = 1;
  std::string err;
  EXPECT_EQ(run_cli({"homogenize", "--config", write_config(dir, j).string(), "--out", dir.string()}, nullptr, &err),
            cli::solver_error);
  EXPECT_NE(err.find("solver error"), std::string::npos) << err;

  EXPECT_EQ(run_cli({"verify", "--config", (fixtures / "small_disk.json").string(), "--suite", "nonsense", "--out",
                     dir.string()}),
            cli::config_error);
}

TEST(Cli, VerifyPassesOnConsistentRun) {
  const auto dir = scratch("verify_ok");
  std::string out;
  for (const char* suite : {"hygiene", "energy", "symmetry", "definiteness", "homogeneous", "stack", "scaling"}) {
    EXPECT_EQ(run_cli({"verify", "--config", (fixtures / "small_disk.json").string(), "--suite", suite, "--out",
                       dir.string()},
                      &out),
              cli::ok)
        << out;
    EXPECT_NE(out.find("[PASS]"), std::string::npos);
    EXPECT_EQ(out.find("[FAIL]"), std::string::npos) << out;
  }
  const auto report = io::read_json((dir / "small_disk_verify.json").string());
  EXPECT_EQ(report["failed"], 0);
}

TEST(Cli, VerifyDetectsCorruptedTensors) {
  const auto dir = scratch("verify_bad");
  std::string out;
  EXPECT_EQ(run_cli({"verify", "--config", (fixtures / "corrupted_disk.json").string(), "--suite", "energy", "--out",
                     dir.string()},
                    &out),
            cli::check_failed);
  EXPECT_NE(out.find("[FAIL] energy"), std::string::npos) << out;
}

TEST(Cli, CellLengthSweepScalesGradientTensor) {
  const auto dir = scratch("sweep");
  std::string out;
  ASSERT_EQ(run_cli({"sweep", "--config", (fixtures / "small_disk.json").string(), "--axis", "cell_length", "--values",
                     "1,0.5", "--out", dir.string()},
                    &out),
            cli::ok)
      << out;
  std::ifstream csv(dir / "small_disk_sweep_cell_length.csv");
  std::string header, a, b;
  std::getline(csv, header);
  std::getline(csv, a);
  std::getline(csv, b);
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    return f;
  };
  const auto h = split(header), fa = split(a), fb = split(b);
  ASSERT_EQ(fa[1], "ok");
  ASSERT_EQ(fb[1], "ok");
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k] == "c1_GPa") EXPECT_NEAR(std::stod(fa[k]), std::stod(fb[k]), 1e-8 * std::stod(fa[k]));
    if (h[k] == "d1_N") EXPECT_NEAR(std::stod(fa[k]) / std::stod(fb[k]), 4.0, 1e-6);
  }
}

TEST(Cli, SweepRejectsUnknownAxis) {
  const auto dir = scratch("sweep_bad");
  EXPECT_EQ(run_cli({"sweep", "--config", (fixtures / "small_disk.json").string(), "--axis", "color", "--values", "1",
                     "--out", dir.string()}),
            cli::config_error);
}

TEST(Cli, ExecutableExitStatus) {
  const auto dir = scratch("exe");
  const std::string base = std::string(SGH_CLI) + " verify --suite energy --out " + dir.string() + " --config ";
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(base + (fixtures / "small_disk.json").string()), 0);
  EXPECT_EQ(status(base + (fixtures / "corrupted_disk.json").string()), 1);
  EXPECT_EQ(status(base + (dir / "none.json").string()), 2);
}

TEST(Cli, HomogeneousConfigReportsZeroGradientTensors) {
  const auto dir = scratch("homogeneous");
  const auto config = (fs::path(SGH_SOURCE_DIR) / "configs" / "homogeneous.json").string();
  ASSERT_EQ(run_cli({"homogenize", "--config", config, "--out", dir.string()}), cli::ok);
  const auto doc = io::read_json((dir / "homogeneous.json").string());
  const auto t = io::tensors_from_json(doc["tensors"]);
  EXPECT_LE(t.G.max_abs(), 1e-8 * t.C.max_abs());
  EXPECT_LE(t.D.max_abs(), 1e-8 * t.C.max_abs());
  std::string out;
  EXPECT_EQ(run_cli({"verify", "--config", config, "--out", dir.string()}, &out), cli::ok) << out;
  EXPECT_EQ(out.find("[FAIL]"), std::string::npos) << out;
}

namespace {

std::vector<std::map<std::string, std::string>> read_sweep(const fs::path& p) {
  std::ifstream in(p);
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    return f;
  };
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    const auto f = split(line);
    std::map<std::string, std::string> r;
    for (std::size_t k = 0; k < header.size() && k < f.size(); ++k) r[header[k]] = f[k];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST(Cli, InclusionSizeSweepVanishesAtZero) {
  const auto dir = scratch("sweep_size");
  ASSERT_EQ(run_cli({"sweep", "--config", (fixtures / "small_disk.json").string(), "--axis", "inclusion_size",
                     "--values", "0,0.3,0.45", "--out", dir.string()}),
            cli::ok);
  const auto rows = read_sweep(dir / "small_disk_sweep_inclusion_size.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(std::stod(rows[0].at("matrix_fraction")), 1.0);
  for (int c = 1; c <= 6; ++c) {
    const auto key = "d" + std::to_string(c) + "_N";
    EXPECT_LE(std::abs(std::stod(rows[0].at(key))), 1e-6) << key;
    EXPECT_GT(std::abs(std::stod(rows[2].at(key))), 1.0) << key;
  }
  EXPECT_TRUE(fs::exists(dir / "small_disk_inclusion_size_2.json"));
}

TEST(Cli, RepetitionSweepIsFlat) {
  const auto dir = scratch("sweep_rep");
  ASSERT_EQ(run_cli({"sweep", "--config", (fixtures / "small_disk.json").string(), "--axis", "repetition", "--values",
                     "1,2,3", "--out", dir.string()}),
            cli::ok);
  const auto rows = read_sweep(dir / "small_disk_sweep_repetition.csv");
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& [key, v] : rows[0]) {
    if (key.front() != 'c' && key.front() != 'd') continue;
    if (key.find("_GPa") == std::string::npos && key.find("_N") == std::string::npos) continue;
    const double ref = std::stod(v);
    for (int r = 1; r < 3; ++r) EXPECT_NEAR(std::stod(rows[r].at(key)), ref, 0.01 * std::abs(ref)) << key;
  }
}

TEST(Cli, SweepRecordsFailedPointsAndContinues) {
  const auto dir = scratch("sweep_fail");
  auto j = small_config();
  j["solver"]["max_iterations"] = 3;
  // the homogeneous point solves trivially, the inclusion point hits the cap
  std::string out;
  const int rc = run_cli({"sweep", "--config", write_config(dir, j).string(), "--axis", "inclusion_size", "--values",
                          "0,0.45", "--out", dir.string()},
                         &out);
  EXPECT_EQ(rc, cli::solver_error) << out;
  const auto rows = read_sweep(dir / "small_disk_sweep_inclusion_size.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("status"), "ok");
  EXPECT_EQ(rows[1].at("status"), "failed");
}

TEST(Cli, FoamDensityComparisonReport) {
  const auto dir = scratch("density_ab");
  const auto config = (fs::path(SGH_SOURCE_DIR) / "configs" / "foam_cube.json").string();
  std::string out;
  EXPECT_EQ(run_cli({"verify", "--config", config, "--suite", "density_ab", "--out", dir.string()}, &out), cli::ok)
      << out;
  const auto report = io::read_json((dir / "foam_cube_verify.json").string());
  ASSERT_EQ(report["checks"].size(), 1u);
  const auto& data = report["checks"][0];
  // without the density ratio the void carries a body force against the
  // stiffness floor; either outcome of the flipped run is reported
  EXPECT_TRUE(data.contains("D_deviation") || data.contains("error")) << report.dump(2);
  EXPECT_EQ(data["reference_density_weighting"], true);
  EXPECT_LE(data["reference_psi_compatibility"].get<double>(), 1e-10);
}
