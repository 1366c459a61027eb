#include "lightray/cli/run.hpp"

#include "lightray/beams/beam.hpp"
#include "lightray/geometry/geodesic.hpp"
#include "lightray/inversion/recovery.hpp"
#include "lightray/transforms/phantoms.hpp"
#include "lightray/wavesim/gauge.hpp"
#include "lightray/wavesim/quasimode.hpp"

#include <omp.h>
#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <random>

namespace lightray {

using nlohmann::json;
namespace fs = std::filesystem;

RiemannianChart make_chart(const GeometrySpec& g)
{
    const Domain d = Domain::disk(g.radius, g.center);
    if (g.metric == "conformal") return RiemannianChart::conformal(d, g.conformal_amplitude, g.center);
    return RiemannianChart::euclidean(d);
}

RayFamilyOptions family_options(const ExperimentConfig& c, bool full_circle)
{
    RayFamilyOptions o;
    o.n_angles = c.rays.n_angles;
    o.n_offsets = c.rays.n_offsets;
    o.samples = c.rays.samples;
    o.steps = 4 * (c.rays.samples - 1);
    o.n_ttilde = c.rays.n_ttilde;
    o.max_offset = c.rays.max_offset;
    o.T = c.T;
    o.full_circle = full_circle;
    return o;
}

namespace {

double horner(const std::vector<double>& p, double t)
{
    double s = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * t + *it;
    return s;
}

SupportBox box_of(const CoefficientSpec& s, const std::vector<std::pair<Vec2, double>>& disks)
{
    SupportBox b;
    b.t_lo = s.t1;
    b.t_hi = s.t2;
    b.x_lo = Vec2::Constant(1e300);
    b.x_hi = Vec2::Constant(-1e300);
    for (const auto& [c, r] : disks) {
        b.x_lo = b.x_lo.cwiseMin(c - Vec2(r, r));
        b.x_hi = b.x_hi.cwiseMax(c + Vec2(r, r));
    }
    return b;
}

} // namespace

CoefficientPair scalar_phantom(const CoefficientSpec& s)
{
    const ScalarPhantomSpec p = s.scalar;
    const double t1 = s.t1, t2 = s.t2, ramp = s.ramp;
    CoefficientPair q;
    q.q = [=](double t, const Vec2& x) {
        return cd(horner(p.poly, t) * poly_bump((x - p.center).norm() / p.radius).v * time_window(t, t1, t2, ramp).v);
    };
    q.support = box_of(s, {{p.center, p.radius}});
    return q;
}

CoefficientPair oneform_phantom(const CoefficientSpec& s)
{
    const OneFormPhantomSpec p = s.oneform;
    const double t1 = s.t1, t2 = s.t2, ramp = s.ramp, tc = 0.5 * (t1 + t2);
    CoefficientPair A;
    A.b = [=](double t, const Vec2& x) {
        return cd(horner(p.b_poly, t) * poly_bump((x - p.b_center).norm() / p.b_radius).v *
                  time_window(t, t1, t2, ramp).v);
    };
    A.omega = [=](double t, const Vec2& x) {
        const Vec2 d = x - p.swirl_center;
        const double w = poly_bump(d.norm() / p.swirl_radius).v * time_window(t, t1, t2, ramp).v;
        const double r = p.swirl_rate * (t - tc);
        return Vec2c(cd(w * (p.drift - r * d.y())), cd(w * r * d.x()));
    };
    A.support = box_of(s, {{p.b_center, p.b_radius}, {p.swirl_center, p.swirl_radius}});
    return A;
}

namespace {

/// Artifacts of one run, grouped by subcommand.
class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path root) : root_(std::move(root)) {}

    /// Opens root/group/name for writing; the file is recorded when the stream is closed by close().
    std::ofstream open(const std::string& group, const std::string& name)
    {
        fs::create_directories(root_ / group);
        std::ofstream out(root_ / group / name, std::ios::binary);
        if (!out) throw Error("cannot write artifact " + (root_ / group / name).string());
        pending_.push_back({group, name});
        return out;
    }

    void write_json(const std::string& group, const std::string& name, const json& j)
    {
        std::ofstream out = open(group, name);
        out << j.dump(2) << '\n';
    }

    json manifest() const
    {
        json groups = json::object();
        for (const auto& [group, name] : pending_) {
            const fs::path p = root_ / group / name;
            std::ifstream in(p, std::ios::binary);
            const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            const uLong crc = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(bytes.data()), uInt(bytes.size()));
            std::ostringstream hex;
            hex << std::hex << std::setw(8) << std::setfill('0') << crc;
            groups[group].push_back({{"path", group + "/" + name}, {"bytes", bytes.size()}, {"crc32", hex.str()}});
        }
        return groups;
    }

private:
    fs::path root_;
    std::vector<std::pair<std::string, std::string>> pending_;
};

struct Context {
    ExperimentConfig cfg;
    fs::path config_dir;
    ArtifactWriter* out = nullptr;
    std::ostream* log = nullptr;
    std::vector<ThresholdResult> thresholds;
    std::optional<LightRayData> scalar_data;
    std::optional<LightRayData> oneform_data;
};

void threshold(Context& cx, const std::string& name, double value, double limit, bool pass)
{
    cx.thresholds.push_back({name, value, limit, pass});
    *cx.log << "  " << name << " = " << value << " (limit " << limit << ") " << (pass ? "ok" : "VIOLATED") << '\n';
}

CoefficientPair combined_phantom(const CoefficientSpec& s)
{
    CoefficientPair c = oneform_phantom(s);
    const CoefficientPair q = scalar_phantom(s);
    c.q = q.q;
    c.support.x_lo = c.support.x_lo.cwiseMin(q.support.x_lo);
    c.support.x_hi = c.support.x_hi.cwiseMax(q.support.x_hi);
    return c;
}

void run_beam(Context& cx)
{
    const auto& b = cx.cfg.beam;
    const RiemannianChart chart = make_chart(cx.cfg.geometry);
    const double R = cx.cfg.geometry.radius;
    const Vec2 d(std::cos(b.angle), std::sin(b.angle)), nrm(-std::sin(b.angle), std::cos(b.angle));
    const Vec2 y = cx.cfg.geometry.center + R * (b.offset * nrm - std::sqrt(1.0 - b.offset * b.offset) * d);
    const Vec2 v = normalize_velocity(chart, y, d);
    auto fc = std::make_shared<FermiChart2D>(chart, NullGeodesic::make(b.ttilde, integrate_maximal_geodesic(chart, y, v)));
    BeamOptions bo;
    bo.H0 = cd(b.H0_real, b.H0_imag) * MatXc::Identity(2, 2);
    bo.delta = b.delta;
    const CoefficientPair coeffs = combined_phantom(cx.cfg.coefficients);
    const GaussianBeam beam = build_beam(fc, coeffs, b.rho.front(), BeamVariant::Forward, bo);
    QuadratureOptions qo;
    qo.n_s = b.n_s;
    qo.n_z = b.n_z;
    const std::vector<ResidualRow> rows = pde_residual_norm(beam, coeffs, b.rho, qo);

    std::ofstream csv = cx.out->open("beam", "residual_ladder.csv");
    csv << "rho,F_norm,ratio,eikonal_norm,transport_norm\n" << std::setprecision(12);
    bool decreasing = true;
    json jr = json::array();
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        csv << r.rho << ',' << r.F_norm << ',' << r.ratio << ',' << r.eikonal_norm << ',' << r.transport_norm << '\n';
        jr.push_back({{"rho", r.rho}, {"F_norm", r.F_norm}, {"ratio", r.ratio}});
        if (i > 0) decreasing = decreasing && r.ratio < rows[i - 1].ratio;
    }
    csv.close();
    std::ofstream tube = cx.out->open("beam", "beam_tube.csv");
    write_beam_csv(beam, b.csv_s, b.csv_z, tube);
    tube.close();
    cx.out->write_json("beam", "beam_report.json", {{"rows", jr}, {"ratio_decreasing", decreasing}});
    threshold(cx, "beam_ratio_decreasing", decreasing ? 1.0 : 0.0, 1.0, decreasing);
}

void run_forward(Context& cx)
{
    const RiemannianChart chart = make_chart(cx.cfg.geometry);
    const RayFamily half = RayFamily::disk(chart, family_options(cx.cfg, false));
    cx.scalar_data = light_ray_scalar(scalar_phantom(cx.cfg.coefficients), half);
    std::ofstream s = cx.out->open("forward", "light_ray_scalar.csv");
    write_light_ray_csv(*cx.scalar_data, s);
    s.close();
    json fam = {{"scalar", family_manifest(half)}};
    if (cx.cfg.inversion.oneform) {
        const RayFamily full = RayFamily::disk(chart, family_options(cx.cfg, true));
        cx.oneform_data = light_ray_oneform(oneform_phantom(cx.cfg.coefficients), full);
        std::ofstream o = cx.out->open("forward", "light_ray_oneform.csv");
        write_light_ray_csv(*cx.oneform_data, o);
        o.close();
        fam["oneform"] = family_manifest(full);
    }
    cx.out->write_json("forward", "ray_family.json", fam);
    *cx.log << "  " << half.size() << " rays, " << half.ttilde.size() << " t~ samples\n";
}

LightRayData read_scalar_data(const Context& cx, const RayFamily& fam)
{
    fs::path p = cx.cfg.inversion.scalar_data;
    if (p.is_relative()) p = cx.config_dir / p;
    std::ifstream in(p);
    if (!in) throw ConfigError("config.inversion.scalar_data: cannot open '" + p.string() + "'");
    LightRayData d = read_light_ray_csv(in, TransformKind::Scalar);
    if (d.values.cols() != Eigen::Index(fam.size()) || d.ttilde.size() != fam.ttilde.size())
        throw ConfigError("config.inversion.scalar_data: data has " + std::to_string(d.values.cols()) + " rays and " +
                          std::to_string(d.ttilde.size()) + " t~ samples, the configured family has " +
                          std::to_string(fam.size()) + " and " + std::to_string(fam.ttilde.size()));
    return d;
}

void run_invert(Context& cx)
{
    const auto& in = cx.cfg.inversion;
    const RiemannianChart chart = make_chart(cx.cfg.geometry);
    const RayFamily half = RayFamily::disk(chart, family_options(cx.cfg, false));
    const CoefficientPair q = scalar_phantom(cx.cfg.coefficients);
    LightRayData data;
    if (!in.scalar_data.empty())
        data = read_scalar_data(cx, half);
    else
        data = cx.scalar_data ? *cx.scalar_data : light_ray_scalar(q, half);

    RecoveryOptions ro;
    ro.grid_n = in.grid;
    ro.cgls.lambda_rel = in.lambda_rel;
    ModelClass m;
    m.K = in.K;
    m.t1 = in.t1;
    m.t2 = in.t2;
    m.ramp = in.ramp;
    const ScalarRecovery rec = recover_scalar(data, half, m, ro);
    const double err = spacetime_relative_error(rec, q);
    for (int k = 0; k <= m.K; ++k) {
        std::ofstream f = cx.out->open("invert", "q_monomial_" + std::to_string(k) + ".csv");
        write_grid_csv(rec.monomial[k], f);
    }
    json steps = json::array();
    for (const auto& st : rec.steps) steps.push_back({{"k", st.k}, {"residual", st.residual}, {"iterations", st.iterations}});
    json report = {{"scalar",
                    {{"rel_error", err},
                     {"model_mismatch", rec.model_mismatch},
                     {"model_warning", rec.model_warning},
                     {"K", m.K},
                     {"window", {m.t1, m.t2}},
                     {"steps", steps}}}};
    threshold(cx, "invert_rel_error", err, cx.cfg.thresholds.invert_rel_error, err <= cx.cfg.thresholds.invert_rel_error);

    if (in.oneform) {
        const RayFamily full = RayFamily::disk(chart, family_options(cx.cfg, true));
        const CoefficientPair A = oneform_phantom(cx.cfg.coefficients);
        const LightRayData od = cx.oneform_data ? *cx.oneform_data : light_ray_oneform(A, full);
        ModelClass mo = m;
        mo.K = in.oneform_K;
        const OneFormRecovery ra = recover_oneform(od, full, mo, ro);
        const double ferr = relative_error(ra.field_strength, field_strength_moments(A, mo, ra.b_moments[0].grid));
        for (int k = 0; k <= mo.K; ++k) {
            std::ofstream f = cx.out->open("invert", "F12_moment_" + std::to_string(k) + ".csv");
            write_grid_csv(ra.field_strength.F12[k], f);
        }
        report["oneform"] = {{"field_strength_error", ferr}, {"K", mo.K}};
        threshold(cx, "field_strength_error", ferr, cx.cfg.thresholds.field_strength_error,
                  ferr <= cx.cfg.thresholds.field_strength_error);
    }
    cx.out->write_json("invert", "invert_report.json", report);
}

/// sin^4(pi s) on (0, 1): a compatible boundary pulse.
double pulse(double s) { return s > 0.0 && s < 1.0 ? std::pow(std::sin(kPi * s), 4) : 0.0; }

void run_gauge(Context& cx)
{
    const auto& w = cx.cfg.wavesim;
    std::mt19937_64 rng(cx.cfg.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    BumpField psi;
    // interior bump on [0,1] x [0, gauge_T], vanishing on both ends for all t
    psi.terms.push_back({0.5 + 0.5 * U(rng), w.gauge_T * (0.4 + 0.2 * U(rng)), 0.3 * w.gauge_T,
                         Vec2(0.45 + 0.1 * U(rng), 0.0), 0.35});
    CoefficientPair c2;
    c2.q = [](double t, const Vec2& x) { return cd(0.5 * std::sin(3.0 * x.x() + t)); };
    c2.b = [](double, const Vec2& x) { return cd(0.2 * x.x()); };
    const std::vector<BoundaryDatum> data{
        {[](double t, const Vec2& x) { return cd(x.x() < 0.5 ? pulse(t) : 0.0); }, "left"},
        {[](double t, const Vec2& x) { return cd(x.x() > 0.5 ? pulse(1.5 * (t - 0.2)) : 0.0); }, "right"},
        {[](double t, const Vec2&) { return cd(pulse(0.8 * t), 0.5 * pulse(0.8 * t)); }, "both"},
    };
    json rows = json::array();
    double finest = 0.0;
    for (int cells : w.gauge_cells) {
        const SpaceTimeGrid g = SpaceTimeGrid::interval(0.0, 1.0, cells, w.gauge_T);
        const GaugeReport r = verify_gauge_invariance(g, c2, psi, data);
        rows.push_back({{"cells", cells},
                        {"hx", g.hx},
                        {"dn_rel_error", r.max_dn_error},
                        {"conjugation_error", r.max_conjugation_error}});
        finest = r.max_dn_error;
        *cx.log << "  cells " << cells << ": DN error " << r.max_dn_error << ", |u1 - e^psi u2| "
                << r.max_conjugation_error << '\n';
    }
    const SpaceTimeGrid g = SpaceTimeGrid::interval(0.0, 1.0, w.gauge_cells.back(), w.gauge_T);
    const CoefficientPair c1 = gauge_transform(c2, psi, g);
    for (const auto& h : data) {
        std::ofstream f = cx.out->open("gauge-check", "dn_" + h.name + ".csv");
        write_dn_csv(dn_map(g, c1, h), f);
    }
    const auto& t = psi.terms[0];
    cx.out->write_json("gauge-check", "gauge_report.json",
                       {{"psi", {{"a", t.a}, {"t0", t.t0}, {"tau", t.tau}, {"c", t.c.x()}, {"r", t.r}}}, {"rows", rows}});
    threshold(cx, "gauge_dn_error", finest, cx.cfg.thresholds.gauge_dn_error, finest <= cx.cfg.thresholds.gauge_dn_error);
}

void run_wavesim(Context& cx)
{
    const auto& w = cx.cfg.wavesim;
    const Vec2 c = cx.cfg.geometry.center;
    const double R = cx.cfg.geometry.radius;
    const SpaceTimeGrid g = SpaceTimeGrid::square(c - Vec2(R, R), c + Vec2(R, R), w.field_cells, w.field_T);
    CoefficientPair co;
    co.q = [](double t, const Vec2& x) { return cd(0.5 * std::sin(3.0 * x.x() + t)); };
    co.b = [](double, const Vec2& x) { return cd(0.2 * x.x()); };
    co.omega = [](double, const Vec2& x) { return Vec2c(cd(0.1 * x.y()), cd(-0.1 * x.x())); };
    // plane pulse entering through the left side; zero at t = 0 on the whole boundary
    const double lo = g.lo.x();
    const BoundaryDatum h{[lo](double t, const Vec2& x) { return cd(pulse(t - (x.x() - lo))); }, "plane"};
    SolveOptions so;
    so.store_stride = std::max(1, g.steps / (w.field_levels - 1));
    const WaveSolution u = solve_ibvp(g, co, h, {}, Direction::Forward, so);
    std::ofstream f = cx.out->open("wavesim", "field.csv");
    write_field_csv(u, f);
    f.close();
    std::ofstream d = cx.out->open("wavesim", "dn.csv");
    write_dn_csv(dn_map(u, co, h), d);
    d.close();

    // quasimode remainder ladder in 1+1 dimensions
    auto fc = std::make_shared<FlatFermiChart1D>(1.0, 0.0, 1, RayWindow{0.0, 1.0, 0.6}, 0.8);
    BeamOptions bo;
    bo.delta = 0.4;
    bo.H0 = MatXc::Constant(1, 1, 200.0 * kI);
    BumpField bump;
    bump.terms.push_back({1.0, 1.5, 0.8, Vec2(0.5, 0.0), 0.4});
    CoefficientPair qc;
    qc.q = [bump](double t, const Vec2& x) { return cd(2.0 * bump.value(t, x)); };
    qc.b = [bump](double t, const Vec2& x) { return cd(0.5 * bump.value(t, x)); };
    const GaussianBeam beam = build_beam(fc, qc, w.quasimode_rho.front(), BeamVariant::Forward, bo);
    const SpaceTimeGrid gq = SpaceTimeGrid::interval(0.0, 1.0, w.quasimode_cells, w.quasimode_T);
    const QuasimodeReport rep = quasimode_check(gq, qc, beam, w.quasimode_rho);
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"rho", r.rho}, {"source_norm", r.source_norm}, {"R_l2", r.R_l2}, {"R_h1_over_rho", r.R_h1_scaled}});
    cx.out->write_json("wavesim", "quasimode.json",
                       {{"rows", rows}, {"l2_decreasing", rep.l2_decreasing}, {"h1_decreasing", rep.h1_decreasing}});
    const bool ok = rep.l2_decreasing && rep.h1_decreasing;
    threshold(cx, "quasimode_decreasing", ok ? 1.0 : 0.0, 1.0, ok);
}

template <class F>
void stage(Context& cx, const std::string& name, F&& body)
{
    *cx.log << "[" << name << "]\n";
    try {
        body(cx);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw Error(name + ": " + e.what());
    }
}

} // namespace

RunResult run(const RunOptions& opt, std::ostream& log)
{
    static const std::vector<std::string> known{"beam", "forward", "invert", "gauge-check", "wavesim", "all"};
    if (std::find(known.begin(), known.end(), opt.subcommand) == known.end())
        throw ConfigError("unknown subcommand '" + opt.subcommand + "'");
    if (opt.threads > 0) omp_set_num_threads(opt.threads);

    Context cx;
    cx.cfg = opt.config_path.empty() ? resolve_config(json::object()) : load_config(opt.config_path);
    if (opt.seed) cx.cfg.seed = *opt.seed;
    cx.config_dir = opt.config_path.empty() ? fs::current_path() : fs::absolute(opt.config_path).parent_path();
    const bool all = opt.subcommand == "all";
    validate(cx.cfg, all || opt.subcommand == "invert" || opt.subcommand == "forward");

    ArtifactWriter writer(opt.out_dir);
    cx.out = &writer;
    cx.log = &log;
    writer.write_json("config", "resolved_config.json", cx.cfg.to_json());

    if (all || opt.subcommand == "beam") stage(cx, "beam", run_beam);
    if (all || opt.subcommand == "forward") stage(cx, "forward", run_forward);
    if (all || opt.subcommand == "invert") stage(cx, "invert", run_invert);
    if (all || opt.subcommand == "gauge-check") stage(cx, "gauge-check", run_gauge);
    if (all || opt.subcommand == "wavesim") stage(cx, "wavesim", run_wavesim);

    RunResult res;
    res.thresholds = cx.thresholds;
    json th = json::array();
    bool pass = true;
    for (const auto& t : cx.thresholds) {
        th.push_back({{"name", t.name}, {"value", t.value}, {"limit", t.limit}, {"pass", t.pass}});
        pass = pass && t.pass;
    }
    res.manifest = {{"version", 1},
                    {"subcommand", opt.subcommand},
                    {"seed", cx.cfg.seed},
                    {"groups", writer.manifest()},
                    {"thresholds", th},
                    {"all_thresholds_pass", pass}};
    std::ofstream m(fs::path(opt.out_dir) / "manifest.json");
    m << res.manifest.dump(2) << '\n';
    res.exit_code = (opt.strict && !pass) ? 1 : 0;
    return res;
}

int run_main(const RunOptions& opt, std::ostream& log)
{
    try {
        return run(opt, log).exit_code;
    } catch (const ConfigError& e) {
        log << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace lightray
