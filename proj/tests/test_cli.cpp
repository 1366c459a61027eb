#include <doctest.h>

#include "lightray/cli/config.hpp"

#include <json.hpp>
#include <zlib.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace lightray;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = LIGHTRAY_CONFIG_DIR;

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("lightray_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Run {
    int status = 0;
    std::string log;
};

Run cli(const std::string& args, const fs::path& log_file)
{
    const std::string cmd = std::string(LIGHTRAY_CLI_PATH) + " " + args + " 2> " + log_file.string();
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(log_file);
    r.log.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return r;
}

json read_json(const fs::path& p)
{
    std::ifstream in(p);
    return json::parse(in);
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string crc_hex(const std::string& bytes)
{
    const uLong c = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(bytes.data()), uInt(bytes.size()));
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08lx", c);
    return buf;
}

fs::path write_config(const fs::path& dir, const json& patch)
{
    json j = read_json(kConfigs / "disk_example.json");
    j.merge_patch(patch);
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

} // namespace

TEST_CASE("bundled defaults file matches the built-in defaults")
{
    const json file = read_json(kConfigs / "defaults.json");
    CHECK(file == default_config_json());
    const ExperimentConfig c = ExperimentConfig::from_json(file);
    CHECK(c.T == 6.0);
    CHECK(c.geometry.radius == 1.0);
    CHECK(c.inversion.K == 3);
    CHECK_NOTHROW(validate(c, true));
    CHECK_NOTHROW(resolve_config(read_json(kConfigs / "disk_example.json")));
}

TEST_CASE("schema and range errors name the field")
{
    auto message = [](const json& patch) -> std::string {
        try {
            validate(resolve_config(patch), true);
        } catch (const ConfigError& e) {
            return e.what();
        }
        return "";
    };
    CHECK(message({{"rays", {{"n_angle", 10}}}}).find("config.rays.n_angle: unknown field") != std::string::npos);
    CHECK(message({{"rays", {{"n_angles", "many"}}}}).find("config.rays.n_angles: expected integer") !=
          std::string::npos);
    CHECK(message({{"beam", {{"rho", {8.0, "x"}}}}}).find("config.beam.rho[1]") != std::string::npos);
    CHECK(message({{"geometry", {{"center", {0.0}}}}}).find("config.geometry.center") != std::string::npos);
    CHECK(message({{"T", 3.0}}).find("config.T") != std::string::npos);
    CHECK(message({{"coefficients", {{"t1", 1.5}}}}).find("config.coefficients") != std::string::npos);
    CHECK(message({{"coefficients", {{"scalar", {{"center", {0.8, 0.0}}}}}}}).find("config.coefficients.scalar") !=
          std::string::npos);
    CHECK(message(json::object()).empty());
}

TEST_CASE("run all: manifest, checksums and determinism")
{
    const fs::path a = scratch("all_a"), b = scratch("all_b");
    const std::string cfg = (kConfigs / "disk_example.json").string();
    const Run ra = cli("all --config " + cfg + " --out " + a.string() + " --strict", a / "log.txt");
    INFO(ra.log);
    REQUIRE(ra.status == 0);
    const json m = read_json(a / "manifest.json");
    CHECK(m["subcommand"] == "all");
    CHECK(m["all_thresholds_pass"] == true);
    const json& groups = m["groups"];
    CHECK(groups.size() == 6);
    for (const char* g : {"config", "beam", "forward", "invert", "gauge-check", "wavesim"}) CHECK(groups.contains(g));
    for (auto it = groups.begin(); it != groups.end(); ++it)
        for (const auto& art : it.value()) {
            const std::string bytes = slurp(a / art["path"].get<std::string>());
            CHECK(art["bytes"].get<size_t>() == bytes.size());
            CHECK(bytes.size() > 0);
            CHECK(art["crc32"] == crc_hex(bytes));
        }

    // same seed, different thread count: identical artifacts
    const Run rb = cli("all --config " + cfg + " --out " + b.string() + " --threads 1", b / "log.txt");
    REQUIRE(rb.status == 0);
    CHECK(read_json(b / "manifest.json")["groups"] == groups);
}

TEST_CASE("invert on forward data read back from CSV")
{
    const fs::path dir = scratch("invert");
    const Run rf = cli("forward --config " + (kConfigs / "disk_example.json").string() + " --out " +
                           (dir / "fwd").string(),
                       dir / "fwd.txt");
    REQUIRE(rf.status == 0);
    const fs::path cfg =
        write_config(dir, {{"inversion", {{"scalar_data", (dir / "fwd/forward/light_ray_scalar.csv").string()},
                                          {"oneform", false}}}});
    const Run ri = cli("invert --config " + cfg.string() + " --out " + (dir / "inv").string() + " --strict",
                       dir / "inv.txt");
    INFO(ri.log);
    REQUIRE(ri.status == 0);
    const json rep = read_json(dir / "inv/invert/invert_report.json");
    CHECK(rep["scalar"]["rel_error"].get<double>() <= 0.05);
    CHECK_FALSE(rep.contains("oneform"));

    // data that does not match the configured family is a configuration error
    const fs::path bad = write_config(
        dir, {{"rays", {{"n_angles", 32}}},
              {"inversion", {{"scalar_data", (dir / "fwd/forward/light_ray_scalar.csv").string()}}}});
    const Run rb = cli("invert --config " + bad.string() + " --out " + (dir / "bad").string(), dir / "bad.txt");
    CHECK(rb.status == 2);
    CHECK(rb.log.find("config.inversion.scalar_data") != std::string::npos);
}

TEST_CASE("strict mode, seeds and command line errors")
{
    const fs::path dir = scratch("strict");
    const fs::path tight = write_config(dir, {{"thresholds", {{"gauge_dn_error", 1e-9}}}});
    const std::string base = "gauge-check --config " + tight.string() + " --out ";
    const Run lax = cli(base + (dir / "lax").string(), dir / "lax.txt");
    CHECK(lax.status == 0);
    CHECK(lax.log.find("VIOLATED") != std::string::npos);
    CHECK(read_json(dir / "lax/manifest.json")["all_thresholds_pass"] == false);
    const Run strict = cli(base + (dir / "strict").string() + " --strict", dir / "strict.txt");
    CHECK(strict.status == 1);

    // the seed moves the random gauge, so the DN artifacts change
    const Run s1 = cli(base + (dir / "s1").string() + " --seed 1", dir / "s1.txt");
    const Run s2 = cli(base + (dir / "s2").string() + " --seed 2", dir / "s2.txt");
    REQUIRE(s1.status == 0);
    REQUIRE(s2.status == 0);
    CHECK(read_json(dir / "s1/manifest.json")["seed"] == 1);
    CHECK(slurp(dir / "s1/gauge-check/dn_left.csv") != slurp(dir / "s2/gauge-check/dn_left.csv"));

    const Run missing = cli("beam --config " + (dir / "nope.json").string() + " --out " + (dir / "m").string(),
                            dir / "m.txt");
    CHECK(missing.status == 2);
    const Run unknown = cli("frobnicate", dir / "u.txt");
    CHECK(unknown.status != 0);
}
