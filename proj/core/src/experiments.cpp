#include "qsmooth/experiments.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qsmooth/escape.hpp"
#include "qsmooth/io.hpp"

namespace qsmooth {

void RunReport::write_json(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["config"] = config.serialize();
    j["csv_paths"] = csv_paths;
    j["wall_seconds"] = wall_seconds;
    j["work_units"] = work_units;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    j["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now).count();
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : verdicts)
        vs.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    j["verdicts"] = vs;
    j["all_pass"] = all_pass();
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    f << j.dump(2) << "\n";
}

const std::vector<ExperimentDescriptor>& list_experiments() {
    static const std::vector<ExperimentDescriptor> table = {
        {"commutator-suite",
         {"metric.kind", "commutator.eps_list", "commutator.delta_list"},
         {"greens.csv", "bilaplacian_scan.csv", "heisenberg.csv", "escape.csv"}},
        {"full-theorem-1",
         {"metric.kind", "smoothing.T_list", "smoothing.probe_version",
          "geometry.samples"},
         {"k_summary.csv", "k_phi_summary.csv", "nontrapping.csv",
          "smoothing_rows.csv"}},
        {"k-phi",
         {"metric.kind", "smoothing.T_list", "smoothing.probe_version"},
         {"k_phi_summary.csv", "smoothing_rows.csv"}},
        {"k-plateau",
         {"metric.kind", "smoothing.T_list", "smoothing.probe_version"},
         {"k_summary.csv", "smoothing_rows.csv"}},
        {"nontrapping-certify",
         {"metric.kind", "geometry.samples", "geometry.escape_radius"},
         {"nontrapping.csv"}},
        {"phasespace-decay",
         {"phasespace.R_list", "phasespace.s_list", "operators.sigma"},
         {"decay_out.csv", "decay_in.csv", "decomposition.csv",
          "decay_fit.json"}},
        {"poincare",
         {"metric.kind", "poincare.eps_list"},
         {"poincare.csv"}},
        {"rage-suite",
         {"metric.kind", "phasespace.rage_T_list", "phasespace.tau_list"},
         {"rage_average.csv", "rage_localized.csv"}},
    };
    return table;
}

std::shared_ptr<const MetricField> make_metric(const Config& cfg) {
    const int dim = int(cfg.get_int_or("grid", "dim", 2));
    const int n = int(cfg.get_int_or("grid", "n", 64));
    const double extent = cfg.get_double_or("grid", "extent", 20.0);
    const Grid g = Grid::cubic(dim, n, extent);
    const std::string kind = cfg.get_or("metric", "kind", "flat");
    const double R0 = cfg.get_double_or("metric", "r0", 1.0);
    if (kind == "flat") return MetricField::flat(g, R0);
    const double A = cfg.get_double("metric", "amplitude");
    const double w = cfg.get_double("metric", "width");
    if (kind == "conformal-bump") return MetricField::conformal_bump(g, R0, A, w);
    if (kind == "warped-radial") return MetricField::warped_radial(g, R0, A, w);
    if (kind == "custom-table") {
        const auto r = cfg.get_list("metric", "table_r");
        const auto l = cfg.get_list("metric", "table_lambda");
        if (r.size() != l.size())
            throw ConfigError("metric table_r / table_lambda length mismatch");
        return MetricField::custom_table(g, R0, r, l);
    }
    throw ConfigError("unknown metric kind: " + kind);
}

Workbench make_workbench(const Config& cfg) {
    Workbench wb;
    wb.metric = make_metric(cfg);
    wb.H = std::make_shared<Hamiltonian>(wb.metric);
    wb.seed = std::uint64_t(cfg.get_int_or("experiment", "seed", 1));
    wb.threads = int(cfg.get_int_or("experiment", "threads", 1));

    const std::string calc_mode = cfg.get_or("operators", "calculus", "auto");
    CalcMode mode;
    if (calc_mode == "full")
        mode = CalcMode::FullEigen;
    else if (calc_mode == "lanczos")
        mode = CalcMode::Lanczos;
    else
        mode = wb.metric->grid().size() <= 2500 ? CalcMode::FullEigen
                                                : CalcMode::Lanczos;
    wb.calc = std::make_shared<SpectralCalculus>(
        wb.H, mode, cfg.get_double_or("operators", "calc_tol", 1e-10),
        int(cfg.get_int_or("operators", "calc_rank", 400)));

    PropagatorConfig pc;
    pc.dt = cfg.get_double_or("propagator", "dt", 0.05);
    pc.tol = cfg.get_double_or("propagator", "tol", 1e-10);
    const std::string scheme = cfg.get_or("propagator", "scheme", "krylov");
    if (scheme == "krylov")
        pc.scheme = Scheme::KrylovExpm;
    else if (scheme == "chebyshev")
        pc.scheme = Scheme::Chebyshev;
    else if (scheme == "split-step")
        pc.scheme = Scheme::SplitStep;
    else
        throw ConfigError("unknown propagator scheme: " + scheme);
    pc.sponge.on = cfg.get_bool_or("propagator", "sponge", false);
    pc.sponge.onset = cfg.get_double_or("propagator", "sponge_onset",
                                        8.0 * wb.metric->R0());
    pc.sponge.strength = cfg.get_double_or("propagator", "sponge_strength", 1.0);
    pc.v_max = cfg.get_double_or("propagator", "v_max", 0.0);
    wb.prop = std::make_shared<Propagator>(wb.H, pc);

    wb.cutoffs.R0 = wb.metric->R0();
    wb.cutoffs.ball_frac =
        cfg.get_double_or("phasespace", "ball_frac", 0.01);
    return wb;
}

void validate_config(const Config& cfg) {
    const std::string name = cfg.get("experiment", "name");
    for (const auto& d : list_experiments()) {
        if (d.name != name) continue;
        std::vector<std::string> missing;
        for (const auto& rf : d.required_fields) {
            const auto dotpos = rf.find('.');
            const std::string sec = rf.substr(0, dotpos);
            const std::string key = rf.substr(dotpos + 1);
            if (!cfg.has(sec, key)) missing.push_back(rf);
        }
        if (!missing.empty()) {
            std::string msg = "config for '" + name + "' missing fields:";
            for (const auto& mfield : missing) msg += " " + mfield;
            throw ConfigError(msg);
        }
        return;
    }
    throw ConfigError("unknown experiment: " + name);
}

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------- geometry

void run_nontrapping(const Config& cfg, const fs::path& dir, RunReport& rep) {
    auto metric = make_metric(cfg);
    const int samples = int(cfg.get_int("geometry", "samples"));
    const double shell_lo = cfg.get_double_or("geometry", "shell_lo", 0.5);
    const double shell_hi = cfg.get_double_or("geometry", "shell_hi", 2.0);
    const double escape_radius = cfg.get_double("geometry", "escape_radius");
    const double s_max = cfg.get_double_or("geometry", "s_max", 60.0);
    const double tol = cfg.get_double_or("geometry", "flow_tol", 1e-10);
    const auto seed = std::uint64_t(cfg.get_int_or("experiment", "seed", 1));
    const int threads = int(cfg.get_int_or("experiment", "threads", 1));

    const auto cert = certify_nontrapping(*metric, shell_lo, shell_hi, samples,
                                          escape_radius, s_max, tol, seed,
                                          threads);

    CsvWriter csv(dir / "nontrapping.csv",
                  {"field", "value"});
    csv.row({std::string("verdict"), std::string(cert.pass ? "PASS" : "FAIL")});
    csv.row({std::string("samples"), std::int64_t(cert.samples)});
    csv.row({std::string("seed"), std::int64_t(cert.seed)});
    csv.row({std::string("shell_lo"), cert.shell_lo});
    csv.row({std::string("shell_hi"), cert.shell_hi});
    csv.row({std::string("escape_radius"), cert.escape_radius});
    csv.row({std::string("s_max"), cert.s_max});
    csv.row({std::string("max_escape_param"), cert.max_escape_param});
    csv.row({std::string("n_trapped"), std::int64_t(cert.n_trapped)});
    csv.row({std::string("n_undecided"), std::int64_t(cert.n_undecided)});
    for (int a = 0; a < metric->dim(); ++a) {
        csv.row({"offending_x" + std::to_string(a), cert.offending.x[a]});
        csv.row({"offending_xi" + std::to_string(a), cert.offending.xi[a]});
    }
    csv.row({std::string("offending_libration"), cert.offending_libration});
    rep.csv_paths.push_back((dir / "nontrapping.csv").string());

    rep.append({"nontrapping.no-undecided-samples", cert.n_undecided == 0,
                std::to_string(cert.n_undecided) + " undecided"});
    if (cfg.has("geometry", "expect")) {
        const std::string expect = cfg.get("geometry", "expect");
        const bool want_pass = expect == "pass";
        rep.append({"nontrapping.certificate-matches-expectation",
                    cert.pass == want_pass,
                    std::string("certificate ") + (cert.pass ? "PASS" : "FAIL") +
                        ", expected " + expect});
    } else {
        rep.append({"nontrapping.certificate",
                    true,
                    std::string("certificate ") + (cert.pass ? "PASS" : "FAIL") +
                        " (informational)"});
    }
    rep.work_units += samples;
}

// ---------------------------------------------------------------- smoothing

void run_k_estimates(const Config& cfg, const fs::path& dir, RunReport& rep,
                     bool phi_variant) {
    Workbench wb = make_workbench(cfg);
    SmoothingParams params;
    params.sigma = cfg.get_double_or("operators", "sigma", 0.1);
    params.dt_report =
        std::min(cfg.get_double_or("smoothing", "dt_report", 0.05),
                 wb.prop->config().dt);
    auto T_list = cfg.get_list("smoothing", "T_list");

    std::vector<WaveField> data;
    const int version = int(cfg.get_int("smoothing", "probe_version"));
    const std::string probe_kind = cfg.get_or("smoothing", "probe_kind", "set");
    if (probe_kind == "set") {
        data = smoothing_probe_set(version, wb.metric);
    } else if (probe_kind == "orbit") {
        data.push_back(orbit_probe(wb.metric,
                                   cfg.get_double("smoothing", "orbit_radius"),
                                   int(cfg.get_int("smoothing", "orbit_index"))));
    } else {
        throw ConfigError("unknown smoothing probe_kind: " + probe_kind);
    }

    const KEstimate kfull = estimate_K(data, params, T_list, *wb.prop, *wb.calc,
                                       wb.cutoffs, false, wb.threads);
    const KEstimate kphi = estimate_K(data, params, T_list, *wb.prop, *wb.calc,
                                      wb.cutoffs, true, wb.threads);

    const std::string metric_id = wb.metric->describe();
    {
        CsvWriter rows(dir / "smoothing_rows.csv",
                       {"metric_id", "datum_id", "T", "spacetime_norm",
                        "h_half_norm", "ratio", "variant"});
        for (const auto& r : kfull.rows)
            rows.row({metric_id, std::int64_t(r.datum), r.T, r.spacetime,
                      r.h_half, r.ratio, std::string("full")});
        for (const auto& r : kphi.rows)
            rows.row({metric_id, std::int64_t(r.datum), r.T, r.spacetime,
                      r.h_half, r.ratio, std::string("phi")});
        rep.csv_paths.push_back((dir / "smoothing_rows.csv").string());
    }
    {
        const std::string fname = phi_variant ? "k_phi_summary.csv" : "k_summary.csv";
        CsvWriter summary(dir / fname, {"T", "K", "K_phi"});
        for (std::size_t j = 0; j < T_list.size(); ++j)
            summary.row({T_list[j], kfull.K[j], kphi.K[j]});
        rep.csv_paths.push_back((dir / fname).string());
    }

    // invariant: K nondecreasing in T
    bool mono = true;
    for (std::size_t j = 1; j < kfull.K.size(); ++j)
        mono = mono && kfull.K[j] >= kfull.K[j - 1] - 1e-12;
    rep.append({"smoothing.K-nondecreasing", mono, ""});

    const auto& K = phi_variant ? kphi.K : kfull.K;
    if (cfg.has("smoothing", "ratio_T_lo") && cfg.has("smoothing", "ratio_T_hi")) {
        const double Tlo = cfg.get_double("smoothing", "ratio_T_lo");
        const double Thi = cfg.get_double("smoothing", "ratio_T_hi");
        double Klo = 0, Khi = 0;
        for (std::size_t j = 0; j < T_list.size(); ++j) {
            if (T_list[j] == Tlo) Klo = K[j];
            if (T_list[j] == Thi) Khi = K[j];
        }
        if (Klo <= 0) throw ConfigError("ratio_T_lo not in T_list");
        const double ratio = Khi / Klo;
        if (cfg.has("smoothing", "ratio_max")) {
            const double rmax = cfg.get_double("smoothing", "ratio_max");
            rep.append({phi_variant ? "smoothing.K-phi-plateau"
                                    : "smoothing.K-plateau",
                        ratio <= rmax,
                        "ratio " + fmt(ratio) + " vs max " + fmt(rmax)});
        }
        if (cfg.has("smoothing", "ratio_min")) {
            const double rmin = cfg.get_double("smoothing", "ratio_min");
            rep.append({phi_variant ? "smoothing.K-phi-growth"
                                    : "smoothing.K-growth",
                        ratio >= rmin,
                        "ratio " + fmt(ratio) + " vs min " + fmt(rmin)});
        }
    }
    // localization inequality with the frozen flat-space constant
    if (cfg.has("smoothing", "c_phi_frozen")) {
        const double C = cfg.get_double("smoothing", "c_phi_frozen");
        bool ok = true;
        double worst = 0;
        for (std::size_t j = 0; j < T_list.size(); ++j) {
            const double lhs = kfull.K[j];
            const double rhs = C + C * kphi.K[j];
            worst = std::max(worst, lhs - rhs);
            ok = ok && lhs <= rhs;
        }
        rep.append({"smoothing.localization-inequality", ok,
                    "max(K - C(1+K_phi)) = " + fmt(worst) + ", C = " + fmt(C)});
    }
    rep.work_units += std::int64_t(data.size() * T_list.back() /
                                   params.dt_report);
}

// ---------------------------------------------------------------- poincare

void run_poincare(const Config& cfg, const fs::path& dir, RunReport& rep) {
    Workbench wb = make_workbench(cfg);
    const auto eps_list = cfg.get_list("poincare", "eps_list");
    const double sigma = cfg.get_double_or("operators", "sigma", 0.1);

    CsvWriter csv(dir / "poincare.csv", {"eps", "constant"});
    const std::vector<double> vals =
        poincare_constants(*wb.H, wb.cutoffs, eps_list, sigma);
    for (std::size_t i = 0; i < eps_list.size(); ++i)
        csv.row({eps_list[i], vals[i]});
    rep.csv_paths.push_back((dir / "poincare.csv").string());

    bool finite = true, monotone = true;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        finite = finite && std::isfinite(vals[i]) && vals[i] >= 0;
        if (i > 0 && eps_list[i] < eps_list[i - 1])
            monotone = monotone && vals[i] <= vals[i - 1] * (1 + 1e-9);
    }
    rep.append({"poincare.finite", finite, ""});
    rep.append({"poincare.monotone-in-eps", monotone,
                "constants must not increase as eps decreases"});
    // kernel check: zero is simple with constant eigenvector
    if (wb.calc->mode() == CalcMode::FullEigen) {
        const auto& ev = wb.calc->eigenvalues();
        const bool kernel_ok =
            ev.size() >= 2 && std::abs(ev[0]) < 1e-8 && ev[1] > 1e-8;
        rep.append({"poincare.constants-only-kernel", kernel_ok,
                    "lambda_0 = " + fmt(ev.empty() ? -1 : ev[0]) +
                        ", lambda_1 = " + fmt(ev.size() > 1 ? ev[1] : -1)});
    }
    rep.work_units += std::int64_t(eps_list.size());
}

// -------------------------------------------------------------- commutator

void run_commutator(const Config& cfg, const fs::path& dir, RunReport& rep) {
    Workbench wb = make_workbench(cfg);
    const auto eps_list = cfg.get_list("commutator", "eps_list");
    const auto delta_list = cfg.get_list("commutator", "delta_list");
    const int n_quad = int(cfg.get_int_or("commutator", "greens_quad", 4096));

    {
        CsvWriter csv(dir / "greens.csv", {"eps", "delta", "value"});
        bool all_negative = true;
        double anchor = 0;
        for (double eps : eps_list) {
            MultiplierField a = build_multiplier(wb.metric, eps);
            for (double delta : delta_list) {
                const double v = greens_functional(a, delta, n_quad);
                csv.row({eps, delta, v});
                all_negative = all_negative && v < 0;
                if (eps == eps_list.front() && delta == 0.0) anchor = v;
            }
        }
        rep.csv_paths.push_back((dir / "greens.csv").string());
        rep.append({"commutator.greens-negative", all_negative, ""});
        if (delta_list.front() == 0.0) {
            const double lo = -4.0 * M_PI - 0.5, hi = -4.0 * M_PI + 0.5;
            rep.append({"commutator.greens-anchor",
                        anchor > lo && anchor < hi,
                        "value " + fmt(anchor) + " vs -4pi = " + fmt(-4 * M_PI)});
        }
    }

    {
        const double eps = cfg.get_double_or("commutator", "eps", 0.05);
        MultiplierField a = build_multiplier(wb.metric, eps);
        auto radii = cfg.get_list_or(
            "commutator", "radii",
            {3 * wb.metric->R0(), 5 * wb.metric->R0(), 8 * wb.metric->R0()});
        const auto scan = bilaplacian_sign_scan(a, radii);
        CsvWriter csv(dir / "bilaplacian_scan.csv",
                      {"radius", "bilaplacian", "weighted", "threshold", "pass"});
        for (const auto& row : scan.rows)
            csv.row({row.radius, row.bilaplacian, row.weighted, -scan.c_eps,
                     std::string(row.pass ? "PASS" : "FAIL")});
        rep.csv_paths.push_back((dir / "bilaplacian_scan.csv").string());
        rep.append({"commutator.bilaplacian-sign", scan.pass,
                    "c_eps = " + fmt(scan.c_eps)});

        // Hessian eigenvalue floor over [3R0, 10R0]
        double floor = 1e300;
        for (int i = 0; i <= 70; ++i) {
            const double r = (3.0 + 0.1 * i) * wb.metric->R0();
            const double lo = std::min(a.hess_tangential(r), a.hess_radial(r));
            floor = std::min(floor, lo * std::pow(r, 1.0 + eps));
        }
        rep.append({"commutator.hessian-floor", floor > 0,
                    "min eigenvalue * r^(1+eps) = " + fmt(floor)});
    }

    // Heisenberg residual across a dt ladder; slope of log(res) vs log(dt)
    {
        const auto dt_list =
            cfg.get_list_or("commutator", "heisenberg_dt_list", {4e-3, 2e-3, 1e-3});
        const int nt = int(cfg.get_int_or("commutator", "heisenberg_nt", 9));
        const double eps = cfg.get_double_or("commutator", "eps", 0.05);
        MultiplierField a = build_multiplier(wb.metric, eps);
        const WaveField u0 = gaussian_packet(
            wb.metric, Vec3{0, 0, 0}, wb.metric->R0(),
            Vec3{1.0 / wb.metric->R0(), 0, 0});

        CsvWriter csv(dir / "heisenberg.csv", {"dt", "residual"});
        std::vector<double> lx, ly;
        for (double dt : dt_list) {
            const double res =
                heisenberg_residual(a, u0, 0.0, dt, nt, *wb.prop);
            csv.row({dt, res});
            lx.push_back(std::log(dt));
            ly.push_back(std::log(std::max(res, 1e-300)));
        }
        rep.csv_paths.push_back((dir / "heisenberg.csv").string());
        if (lx.size() >= 2) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                sx += lx[i];
                sy += ly[i];
                sxx += lx[i] * lx[i];
                sxy += lx[i] * ly[i];
            }
            const double n = double(lx.size());
            const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            rep.append({"commutator.heisenberg-second-order",
                        slope > 1.8 && slope < 2.2,
                        "fitted slope " + fmt(slope)});
        }
    }

    // escape-symbol monotonicity along sampled flow
    {
        const int ntraj = int(cfg.get_int_or("commutator", "escape_samples", 24));
        const double s_max = cfg.get_double_or("commutator", "escape_s_max", 20.0);
        std::vector<Trajectory> trajs;
        FlowOptions fo;
        fo.tol = 1e-10;
        fo.max_step = 0.02;
        for (int i = 0; i < ntraj; ++i) {
            GeodesicState st;
            const double R0 = wb.metric->R0();
            st.x = {2.0 * R0 * (2 * halton(i + 1, 2) - 1),
                    wb.metric->dim() > 1 ? 2.0 * R0 * (2 * halton(i + 1, 3) - 1)
                                         : 0.0,
                    0.0};
            const double th = 2 * M_PI * halton(i + 1, 5);
            st.xi = {std::cos(th), wb.metric->dim() > 1 ? std::sin(th) : 0.0, 0.0};
            trajs.push_back(geodesic_flow(*wb.metric, st, s_max, fo));
        }
        const auto sym = EscapeSymbol::euclidean_default(
            cfg.get_double_or("commutator", "escape_C_phi", 1.0));
        const auto esc = escape_monotonicity(sym, *wb.metric, trajs, wb.cutoffs);
        CsvWriter csv(dir / "escape.csv", {"field", "value"});
        csv.row({std::string("min_flow_derivative"), esc.min_flow_derivative});
        csv.row({std::string("min_gap_on_phi"), esc.min_gap_on_phi});
        csv.row({std::string("trajectories"), std::int64_t(esc.trajectories)});
        csv.row({std::string("samples"), std::int64_t(esc.samples)});
        rep.csv_paths.push_back((dir / "escape.csv").string());
        if (cfg.has("commutator", "expect_monotone")) {
            const bool want = cfg.get_bool_or("commutator", "expect_monotone", true);
            rep.append({"commutator.escape-monotone", esc.monotone == want,
                        "min d/ds = " + fmt(esc.min_flow_derivative)});
        } else {
            rep.append({"commutator.escape-scan", true,
                        "min d/ds = " + fmt(esc.min_flow_derivative) +
                            " (informational)"});
        }
    }
    rep.work_units += 1;
}

// -------------------------------------------------------------- phasespace

void run_phasespace(const Config& cfg, const fs::path& dir, RunReport& rep) {
    Workbench wb = make_workbench(cfg);
    if (!wb.metric->is_flat())
        throw ConfigError("phasespace-decay runs on the flat metric");

    DecayScanConfig sc;
    sc.R_list = cfg.get_list("phasespace", "R_list");
    sc.s_list = cfg.get_list("phasespace", "s_list");
    sc.sigma = cfg.get_double_or("operators", "sigma", 0.1);
    sc.m_cap = int(cfg.get_int_or("phasespace", "m_cap", 4));
    sc.l_cap = int(cfg.get_int_or("phasespace", "l_cap", 4));

    const int version = int(cfg.get_int_or("phasespace", "probe_version", 1));
    std::vector<std::vector<WaveField>> probes;
    for (double R : sc.R_list)
        probes.push_back(decay_probe_set(version, wb.metric, wb.cutoffs, R,
                                         wb.seed));

    const DecayScan out_scan =
        outgoing_decay_scan(sc, wb.cutoffs, *wb.prop, probes);
    const DecayScan in_scan =
        incoming_decay_scan(sc, wb.cutoffs, *wb.prop, probes);

    auto dump = [&](const DecayScan& s, const std::string& name) {
        CsvWriter csv(dir / name, {"probe", "R", "s", "value", "used"});
        for (const auto& r : s.rows)
            csv.row({std::int64_t(r.probe), r.R, r.s, r.value,
                     std::string(r.used ? "1" : "0")});
        rep.csv_paths.push_back((dir / name).string());
    };
    dump(out_scan, "decay_out.csv");
    dump(in_scan, "decay_in.csv");

    {
        nlohmann::json j;
        for (const auto* s : {&out_scan, &in_scan}) {
            nlohmann::json side;
            side["exponent"] = s->exponent;
            side["constant"] = s->constant;
            side["log_rms"] = s->log_rms;
            side["per_probe_exponent"] = s->probe_exponent;
            side["per_probe_rms"] = s->probe_rms;
            side["m_cap"] = s->m_cap;
            side["l_cap"] = s->l_cap;
            side["floor"] = s->floor;
            j[s == &out_scan ? "outgoing" : "incoming"] = side;
        }
        j["probe_ids"] = {"bump-f0", "bump-f1", "bump-f2", "medium-band-noise"};
        std::ofstream f(dir / "decay_fit.json");
        f << j.dump(2) << "\n";
        rep.csv_paths.push_back((dir / "decay_fit.json").string());
    }

    const double exp_max = cfg.get_double_or("phasespace", "exponent_max", -1.0);
    const double rms_max = cfg.get_double_or("phasespace", "rms_max", 0.3);
    rep.append({"phasespace.outgoing-exponent", out_scan.exponent <= exp_max,
                "exponent " + fmt(out_scan.exponent) + " vs " + fmt(exp_max)});
    rep.append({"phasespace.incoming-exponent", in_scan.exponent <= exp_max,
                "exponent " + fmt(in_scan.exponent) + " vs " + fmt(exp_max)});
    rep.append({"phasespace.fit-residual",
                out_scan.log_rms <= rms_max && in_scan.log_rms <= rms_max,
                "log-rms " + fmt(out_scan.log_rms) + " / " +
                    fmt(in_scan.log_rms)});

    // decomposition residual on seeded band-limited fields
    {
        const double R = cfg.get_double_or("phasespace", "decomp_R",
                                           sc.R_list.front());
        const double k0 = cfg.get_double_or("phasespace", "decomp_k0", 2.0);
        const int nfields = int(cfg.get_int_or("phasespace", "decomp_fields", 3));
        DyadicConfig dc;
        dc.shells = int(cfg.get_int_or("phasespace", "decomp_shells", 3));
        dc.sectors = int(cfg.get_int_or("phasespace", "decomp_sectors", 6));
        CsvWriter csv(dir / "decomposition.csv", {"field_seed", "residual"});
        double worst = 0;
        for (int i = 0; i < nfields; ++i) {
            WaveField f = band_limited_noise(wb.metric, k0, wb.seed + 100 + i);
            const double r = decomposition_residual(f, R, wb.cutoffs, dc);
            csv.row({std::int64_t(wb.seed + 100 + i), r});
            worst = std::max(worst, r);
        }
        rep.csv_paths.push_back((dir / "decomposition.csv").string());
        const double rmax =
            cfg.get_double_or("phasespace", "decomp_residual_max", 1e-8);
        rep.append({"phasespace.decomposition-residual", worst <= rmax,
                    "max residual " + fmt(worst) + " vs " + fmt(rmax)});
    }
    rep.work_units += std::int64_t(sc.R_list.size() * sc.s_list.size());
}

// -------------------------------------------------------------------- rage

void run_rage(const Config& cfg, const fs::path& dir, RunReport& rep) {
    Workbench wb = make_workbench(cfg);
    const auto T_list = cfg.get_list("phasespace", "rage_T_list");
    const auto tau_list = cfg.get_list("phasespace", "tau_list");
    const double eps0 = cfg.get_double_or("operators", "eps0", 0.1);
    const double R = cfg.get_double_or("phasespace", "rage_R", 2.0 * wb.metric->R0());

    {
        CompactLocalizer loc;
        loc.R = R;
        if (cfg.get_bool_or("phasespace", "rage_med_filter", false))
            loc.med_eps0 = eps0;
        const WaveField u0 = gaussian_packet(wb.metric, Vec3{0, 0, 0},
                                             wb.metric->R0(), Vec3{0, 0, 0});
        const auto rows = rage_average(loc, u0, T_list, *wb.prop, *wb.calc,
                                       wb.cutoffs,
                                       cfg.get_double_or("smoothing", "dt_report", 0.05));
        CsvWriter csv(dir / "rage_average.csv", {"T", "average"});
        for (const auto& r : rows) csv.row({r.T, r.average});
        rep.csv_paths.push_back((dir / "rage_average.csv").string());

        if (cfg.has("phasespace", "rage_ratio_max")) {
            const double rmax = cfg.get_double("phasespace", "rage_ratio_max");
            const double ratio = rows.back().average / rows.front().average;
            rep.append({"rage.average-decay", ratio <= rmax,
                        "avg(" + fmt(rows.back().T) + ")/avg(" +
                            fmt(rows.front().T) + ") = " + fmt(ratio) + " vs " +
                            fmt(rmax)});
        }
        bool nonneg = true;
        for (const auto& r : rows) nonneg = nonneg && r.average >= 0;
        rep.append({"rage.averages-nonnegative", nonneg, ""});
    }

    {
        const auto f = rage_vector_probe(wb.metric, wb.seed + 7);
        const auto rows = rage_localized(R, tau_list, eps0, f, *wb.calc,
                                         wb.cutoffs, *wb.prop);
        CsvWriter csv(dir / "rage_localized.csv", {"tau", "value"});
        for (const auto& r : rows) csv.row({r.tau, r.value});
        rep.csv_paths.push_back((dir / "rage_localized.csv").string());

        if (cfg.has("phasespace", "rage_localized_ratio_max")) {
            const double rmax =
                cfg.get_double("phasespace", "rage_localized_ratio_max");
            const double ratio = rows.back().value / rows.front().value;
            rep.append({"rage.localized-decay", ratio <= rmax,
                        "value(" + fmt(rows.back().tau) + ")/value(" +
                            fmt(rows.front().tau) + ") = " + fmt(ratio) +
                            " vs " + fmt(rmax)});
        }
    }
    rep.work_units += std::int64_t(T_list.back() / 0.05);
}

}  // namespace

RunReport run_experiment(const Config& cfg, const fs::path& out_root) {
    validate_config(cfg);
    RunReport rep;
    rep.experiment = cfg.get("experiment", "name");
    rep.config = cfg;
    const fs::path dir = out_root / rep.experiment;
    fs::create_directories(dir);

    const auto t0 = std::chrono::steady_clock::now();
    auto guarded = [&](const std::string& label, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            rep.append({label + ".error", false, e.what()});
        }
    };

    if (rep.experiment == "nontrapping-certify") {
        guarded("nontrapping", [&] { run_nontrapping(cfg, dir, rep); });
    } else if (rep.experiment == "k-plateau") {
        guarded("smoothing", [&] { run_k_estimates(cfg, dir, rep, false); });
    } else if (rep.experiment == "k-phi") {
        guarded("smoothing", [&] { run_k_estimates(cfg, dir, rep, true); });
    } else if (rep.experiment == "poincare") {
        guarded("poincare", [&] { run_poincare(cfg, dir, rep); });
    } else if (rep.experiment == "commutator-suite") {
        guarded("commutator", [&] { run_commutator(cfg, dir, rep); });
    } else if (rep.experiment == "phasespace-decay") {
        guarded("phasespace", [&] { run_phasespace(cfg, dir, rep); });
    } else if (rep.experiment == "rage-suite") {
        guarded("rage", [&] { run_rage(cfg, dir, rep); });
    } else if (rep.experiment == "full-theorem-1") {
        guarded("nontrapping", [&] { run_nontrapping(cfg, dir, rep); });
        guarded("smoothing", [&] { run_k_estimates(cfg, dir, rep, false); });
    }

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    rep.write_json(dir / "run_report.json");
    return rep;
}

}  // namespace qsmooth
