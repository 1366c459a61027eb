#include "lightray/cli/config.hpp"

#include "lightray/geometry/chart.hpp"
#include "lightray/transforms/light_ray.hpp"

#include <fstream>

namespace lightray {

using nlohmann::json;

namespace {

json vec2(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 read_vec2(const json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 2) throw ConfigError(path + ": expected an array of two numbers");
    return Vec2(j[0].get<double>(), j[1].get<double>());
}

std::string type_name(const json& j)
{
    if (j.is_object()) return "object";
    if (j.is_array()) return "array";
    if (j.is_boolean()) return "boolean";
    if (j.is_number_integer()) return "integer";
    if (j.is_number()) return "number";
    if (j.is_string()) return "string";
    return "null";
}

bool same_kind(const json& value, const json& schema)
{
    if (schema.is_object()) return value.is_object();
    if (schema.is_array()) return value.is_array();
    if (schema.is_boolean()) return value.is_boolean();
    if (schema.is_number_integer()) return value.is_number_integer();
    if (schema.is_number()) return value.is_number();
    if (schema.is_string()) return value.is_string();
    return false;
}

} // namespace

void check_schema(const json& user, const json& schema, const std::string& path)
{
    if (!same_kind(user, schema))
        throw ConfigError(path + ": expected " + type_name(schema) + ", got " + type_name(user));
    if (schema.is_object()) {
        for (auto it = user.begin(); it != user.end(); ++it) {
            if (!schema.contains(it.key())) throw ConfigError(path + "." + it.key() + ": unknown field");
            check_schema(it.value(), schema.at(it.key()), path + "." + it.key());
        }
    } else if (schema.is_array() && !schema.empty()) {
        for (size_t i = 0; i < user.size(); ++i)
            check_schema(user[i], schema[0], path + "[" + std::to_string(i) + "]");
    }
}

json ExperimentConfig::to_json() const
{
    json j;
    j["version"] = version;
    j["seed"] = seed;
    j["T"] = T;
    j["geometry"] = {{"radius", geometry.radius},
                     {"center", vec2(geometry.center)},
                     {"metric", geometry.metric},
                     {"conformal_amplitude", geometry.conformal_amplitude}};
    const auto& s = coefficients.scalar;
    const auto& o = coefficients.oneform;
    j["coefficients"] = {
        {"t1", coefficients.t1},
        {"t2", coefficients.t2},
        {"ramp", coefficients.ramp},
        {"scalar", {{"poly", s.poly}, {"center", vec2(s.center)}, {"radius", s.radius}}},
        {"oneform",
         {{"b_poly", o.b_poly},
          {"b_center", vec2(o.b_center)},
          {"b_radius", o.b_radius},
          {"swirl_center", vec2(o.swirl_center)},
          {"swirl_radius", o.swirl_radius},
          {"swirl_rate", o.swirl_rate},
          {"drift", o.drift}}}};
    j["rays"] = {{"n_angles", rays.n_angles},
                 {"n_offsets", rays.n_offsets},
                 {"samples", rays.samples},
                 {"n_ttilde", rays.n_ttilde},
                 {"max_offset", rays.max_offset}};
    j["beam"] = {{"rho", beam.rho},       {"H0_real", beam.H0_real}, {"H0_imag", beam.H0_imag},
                 {"delta", beam.delta},   {"angle", beam.angle},     {"offset", beam.offset},
                 {"ttilde", beam.ttilde}, {"n_s", beam.n_s},         {"n_z", beam.n_z},
                 {"csv_s", beam.csv_s},   {"csv_z", beam.csv_z}};
    j["inversion"] = {{"K", inversion.K},
                      {"oneform_K", inversion.oneform_K},
                      {"oneform", inversion.oneform},
                      {"lambda_rel", inversion.lambda_rel},
                      {"grid", inversion.grid},
                      {"t1", inversion.t1},
                      {"t2", inversion.t2},
                      {"ramp", inversion.ramp},
                      {"scalar_data", inversion.scalar_data}};
    j["wavesim"] = {{"gauge_cells", wavesim.gauge_cells},
                    {"gauge_T", wavesim.gauge_T},
                    {"field_cells", wavesim.field_cells},
                    {"field_T", wavesim.field_T},
                    {"field_levels", wavesim.field_levels},
                    {"quasimode_rho", wavesim.quasimode_rho},
                    {"quasimode_cells", wavesim.quasimode_cells},
                    {"quasimode_T", wavesim.quasimode_T}};
    j["thresholds"] = {{"invert_rel_error", thresholds.invert_rel_error},
                       {"field_strength_error", thresholds.field_strength_error},
                       {"gauge_dn_error", thresholds.gauge_dn_error}};
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j)
{
    check_schema(j, default_config_json());
    ExperimentConfig c;
    try {
        c.version = j.at("version").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.T = j.at("T").get<double>();
        const json& g = j.at("geometry");
        c.geometry.radius = g.at("radius").get<double>();
        c.geometry.center = read_vec2(g.at("center"), "config.geometry.center");
        c.geometry.metric = g.at("metric").get<std::string>();
        c.geometry.conformal_amplitude = g.at("conformal_amplitude").get<double>();

        const json& co = j.at("coefficients");
        c.coefficients.t1 = co.at("t1").get<double>();
        c.coefficients.t2 = co.at("t2").get<double>();
        c.coefficients.ramp = co.at("ramp").get<double>();
        const json& s = co.at("scalar");
        c.coefficients.scalar.poly = s.at("poly").get<std::vector<double>>();
        c.coefficients.scalar.center = read_vec2(s.at("center"), "config.coefficients.scalar.center");
        c.coefficients.scalar.radius = s.at("radius").get<double>();
        const json& o = co.at("oneform");
        auto& of = c.coefficients.oneform;
        of.b_poly = o.at("b_poly").get<std::vector<double>>();
        of.b_center = read_vec2(o.at("b_center"), "config.coefficients.oneform.b_center");
        of.b_radius = o.at("b_radius").get<double>();
        of.swirl_center = read_vec2(o.at("swirl_center"), "config.coefficients.oneform.swirl_center");
        of.swirl_radius = o.at("swirl_radius").get<double>();
        of.swirl_rate = o.at("swirl_rate").get<double>();
        of.drift = o.at("drift").get<double>();

        const json& r = j.at("rays");
        c.rays.n_angles = r.at("n_angles").get<int>();
        c.rays.n_offsets = r.at("n_offsets").get<int>();
        c.rays.samples = r.at("samples").get<int>();
        c.rays.n_ttilde = r.at("n_ttilde").get<int>();
        c.rays.max_offset = r.at("max_offset").get<double>();

        const json& b = j.at("beam");
        c.beam.rho = b.at("rho").get<std::vector<double>>();
        c.beam.H0_real = b.at("H0_real").get<double>();
        c.beam.H0_imag = b.at("H0_imag").get<double>();
        c.beam.delta = b.at("delta").get<double>();
        c.beam.angle = b.at("angle").get<double>();
        c.beam.offset = b.at("offset").get<double>();
        c.beam.ttilde = b.at("ttilde").get<double>();
        c.beam.n_s = b.at("n_s").get<int>();
        c.beam.n_z = b.at("n_z").get<int>();
        c.beam.csv_s = b.at("csv_s").get<int>();
        c.beam.csv_z = b.at("csv_z").get<int>();

        const json& in = j.at("inversion");
        c.inversion.K = in.at("K").get<int>();
        c.inversion.oneform_K = in.at("oneform_K").get<int>();
        c.inversion.oneform = in.at("oneform").get<bool>();
        c.inversion.lambda_rel = in.at("lambda_rel").get<double>();
        c.inversion.grid = in.at("grid").get<int>();
        c.inversion.t1 = in.at("t1").get<double>();
        c.inversion.t2 = in.at("t2").get<double>();
        c.inversion.ramp = in.at("ramp").get<double>();
        c.inversion.scalar_data = in.at("scalar_data").get<std::string>();

        const json& w = j.at("wavesim");
        c.wavesim.gauge_cells = w.at("gauge_cells").get<std::vector<int>>();
        c.wavesim.gauge_T = w.at("gauge_T").get<double>();
        c.wavesim.field_cells = w.at("field_cells").get<int>();
        c.wavesim.field_T = w.at("field_T").get<double>();
        c.wavesim.field_levels = w.at("field_levels").get<int>();
        c.wavesim.quasimode_rho = w.at("quasimode_rho").get<std::vector<double>>();
        c.wavesim.quasimode_cells = w.at("quasimode_cells").get<int>();
        c.wavesim.quasimode_T = w.at("quasimode_T").get<double>();

        const json& t = j.at("thresholds");
        c.thresholds.invert_rel_error = t.at("invert_rel_error").get<double>();
        c.thresholds.field_strength_error = t.at("field_strength_error").get<double>();
        c.thresholds.gauge_dn_error = t.at("gauge_dn_error").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

json default_config_json() { return ExperimentConfig{}.to_json(); }

ExperimentConfig resolve_config(const json& user)
{
    check_schema(user, default_config_json());
    json merged = default_config_json();
    merged.merge_patch(user);
    return ExperimentConfig::from_json(merged);
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return resolve_config(j);
}

double longest_chord(const GeometrySpec& g)
{
    if (g.metric == "euclidean") return 2.0 * g.radius;
    const RiemannianChart chart =
        RiemannianChart::conformal(Domain::disk(g.radius, g.center), g.conformal_amplitude, g.center);
    RayFamilyOptions opt;
    opt.n_angles = 16;
    opt.n_offsets = 33;
    opt.samples = 65;
    opt.steps = 512;
    return RayFamily::disk(chart, opt).max_length();
}

namespace {

void require(bool ok, const std::string& path, const std::string& what)
{
    if (!ok) throw ConfigError(path + ": " + what);
}

void check_window(double t1, double t2, double ramp, const std::string& path)
{
    require(t2 > t1, path + ".t2", "must exceed t1");
    require(ramp > 0.0 && 2.0 * ramp <= t2 - t1, path + ".ramp", "must be positive and at most (t2 - t1) / 2");
}

} // namespace

void validate(const ExperimentConfig& c, bool inversion)
{
    require(c.version == 1, "config.version", "only version 1 is supported");
    require(c.T > 0.0, "config.T", "must be positive");
    require(c.geometry.radius > 0.0, "config.geometry.radius", "must be positive");
    require(c.geometry.metric == "euclidean" || c.geometry.metric == "conformal", "config.geometry.metric",
            "must be \"euclidean\" or \"conformal\"");
    check_window(c.coefficients.t1, c.coefficients.t2, c.coefficients.ramp, "config.coefficients");
    check_window(c.inversion.t1, c.inversion.t2, c.inversion.ramp, "config.inversion");
    require(c.coefficients.scalar.radius > 0.0, "config.coefficients.scalar.radius", "must be positive");
    require(!c.coefficients.scalar.poly.empty(), "config.coefficients.scalar.poly", "must not be empty");
    require(c.coefficients.oneform.b_radius > 0.0, "config.coefficients.oneform.b_radius", "must be positive");
    require(c.coefficients.oneform.swirl_radius > 0.0, "config.coefficients.oneform.swirl_radius",
            "must be positive");
    require(c.rays.n_angles >= 8, "config.rays.n_angles", "must be at least 8");
    require(c.rays.n_offsets >= 8, "config.rays.n_offsets", "must be at least 8");
    require(c.rays.samples >= 9 && c.rays.samples % 2 == 1, "config.rays.samples", "must be odd and at least 9");
    require(c.rays.n_ttilde >= 17, "config.rays.n_ttilde", "must be at least 17");
    require(c.rays.max_offset > 0.0 && c.rays.max_offset < 1.0, "config.rays.max_offset", "must lie in (0, 1)");
    require(!c.beam.rho.empty(), "config.beam.rho", "must not be empty");
    for (size_t i = 0; i < c.beam.rho.size(); ++i)
        require(c.beam.rho[i] > 0.0, "config.beam.rho[" + std::to_string(i) + "]", "must be positive");
    require(c.beam.H0_imag > 0.0, "config.beam.H0_imag", "Im H0 must be positive definite");
    require(c.beam.delta > 0.0, "config.beam.delta", "must be positive");
    require(std::abs(c.beam.offset) < 1.0, "config.beam.offset", "must lie in (-1, 1)");
    require(c.beam.n_s % 4 == 1 && c.beam.n_s >= 5, "config.beam.n_s", "must be 1 mod 4");
    require(c.beam.n_z % 4 == 1 && c.beam.n_z >= 5, "config.beam.n_z", "must be 1 mod 4");
    require(c.inversion.K >= 0 && c.inversion.K <= 6, "config.inversion.K", "must lie in [0, 6]");
    require(c.inversion.oneform_K >= 1 && c.inversion.oneform_K <= 6, "config.inversion.oneform_K",
            "must lie in [1, 6]");
    require(c.inversion.lambda_rel >= 0.0, "config.inversion.lambda_rel", "must be nonnegative");
    require(c.inversion.grid >= 17 && c.inversion.grid % 2 == 1, "config.inversion.grid", "must be odd and at least 17");
    require(!c.wavesim.gauge_cells.empty(), "config.wavesim.gauge_cells", "must not be empty");
    for (size_t i = 0; i < c.wavesim.gauge_cells.size(); ++i)
        require(c.wavesim.gauge_cells[i] >= 16, "config.wavesim.gauge_cells[" + std::to_string(i) + "]",
                "must be at least 16");
    require(c.wavesim.gauge_T > 0.0 && c.wavesim.field_T > 0.0 && c.wavesim.quasimode_T > 0.0, "config.wavesim",
            "times must be positive");
    require(c.wavesim.field_cells >= 8, "config.wavesim.field_cells", "must be at least 8");
    require(c.wavesim.field_levels >= 2, "config.wavesim.field_levels", "must be at least 2");
    require(c.wavesim.quasimode_cells >= 16, "config.wavesim.quasimode_cells", "must be at least 16");

    if (!inversion) return;
    const double D = longest_chord(c.geometry);
    require(c.T > 2.0 * D, "config.T", "must exceed twice the longest chord (" + std::to_string(2.0 * D) + ")");
    require(c.coefficients.t1 >= D && c.coefficients.t2 <= c.T - D, "config.coefficients",
            "phantom window [t1, t2] must lie in the recoverable times [" + std::to_string(D) + ", " +
                std::to_string(c.T - D) + "]");
    require(c.inversion.t1 >= D && c.inversion.t2 <= c.T - D, "config.inversion",
            "model window [t1, t2] must lie in the recoverable times [" + std::to_string(D) + ", " +
                std::to_string(c.T - D) + "]");
    const auto inside = [&](const Vec2& cen, double r) {
        return (cen - c.geometry.center).norm() + r <= c.geometry.radius;
    };
    require(inside(c.coefficients.scalar.center, c.coefficients.scalar.radius), "config.coefficients.scalar",
            "spatial support must lie inside the disk");
    require(inside(c.coefficients.oneform.b_center, c.coefficients.oneform.b_radius), "config.coefficients.oneform",
            "b support must lie inside the disk");
    require(inside(c.coefficients.oneform.swirl_center, c.coefficients.oneform.swirl_radius),
            "config.coefficients.oneform", "swirl support must lie inside the disk");
}

} // namespace lightray
