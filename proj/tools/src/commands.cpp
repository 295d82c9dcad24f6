#include "rswave_cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>

#include "rswave/carleman.hpp"
#include "rswave/control.hpp"
#include "rswave/error.hpp"
#include "rswave_cli/csv.hpp"
#include "rswave_cli/presets.hpp"

namespace rswave::cli {

namespace {

class Session {
public:
    Session(const ExperimentConfig& cfg, std::ostream& log, CommandOutcome& out)
        : cfg_(cfg), log_(log), out_(out) {
        std::filesystem::create_directories(cfg.output.dir);
    }

    CsvWriter table(const std::string& name, const std::vector<std::string>& columns) {
        const auto path = (std::filesystem::path(cfg_.output.dir) / (cfg_.output.prefix + name + ".csv")).string();
        out_.files.push_back(path);
        return CsvWriter(path, cfg_.hash, cfg_.mc.seed, columns);
    }

    const ExperimentConfig& cfg() const { return cfg_; }
    std::ostream& log() { return log_; }

private:
    const ExperimentConfig& cfg_;
    std::ostream& log_;
    CommandOutcome& out_;
};

Grid cube_grid(const GeometrySpec& geom, int nx, int steps) {
    return Grid(geom.lo, geom.hi, std::vector<int>(geom.lo.size(), nx), geom.T, steps);
}

Field boundary_zeroed(const Grid& g, Field u) {
    for (std::size_t n = 0; n < g.size(); ++n)
        if (g.is_boundary(n)) u[n] = 0.0;
    return u;
}

std::string condition_diagnostic(const ConditionReport& c) {
    std::string s;
    if (!c.cond1) s += "condition (1) fails: margin " + format_double(c.margin1) + "\n";
    if (!c.cond2) s += "condition (2) fails: margin " + format_double(c.margin2) + "\n";
    if (!c.cond3) s += "condition (3) fails: margin " + format_double(c.margin3) + "\n";
    return s;
}

int cmd_geometry(Session& s) {
    const auto& cfg = s.cfg();
    const auto& geom = cfg.geometry;
    const ControlTimeReport rep = compute_report(geom);
    auto csv = s.table("geometry", {"quantity", "value", "margin"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    csv.row({"dim", static_cast<long>(geom.dim()), nan});
    csv.row({"R1", rep.R1, nan});
    csv.row({"Tstar", rep.Tstar, nan});
    csv.row({"alpha", rep.alpha, nan});
    csv.row({"kappa", geom.kappa, nan});
    csv.row({"T", geom.T, nan});
    csv.row({"kappa_T", geom.kappa * geom.T, geom.kappa * geom.T - rep.Tstar});
    for (const Face& f : rep.gamma0) csv.row({"gamma0_face", to_string(f), nan});
    s.log() << "Tstar = " << format_double(rep.Tstar) << ", Gamma0 faces: " << rep.gamma0.size() << "\n";

    const double r2 = cfg.r2();
    const CarlemanParams p = cfg.carleman_params();
    const ConditionReport c = verify_conditions(p, geom);
    csv.row({"r2", r2, nan});
    csv.row({"beta", p.beta, nan});
    csv.row({"C0", p.C0, nan});
    csv.row({"c0", p.c0, nan});
    csv.row({"c0_tilde", p.c0_tilde, nan});
    csv.row({"c1", p.c1, nan});
    csv.row({"eps", p.eps, nan});
    csv.row({"delta", p.delta, nan});
    csv.row({"condition1", static_cast<long>(c.cond1), c.margin1});
    csv.row({"condition2", static_cast<long>(c.cond2), c.margin2});
    csv.row({"condition3", static_cast<long>(c.cond3), c.margin3});
    csv.row({"inclusions", static_cast<long>(c.inclusions), nan});
    s.log() << "beta = " << format_double(p.beta) << " (r2 = " << format_double(r2) << ")\n";
    if (!c.all()) {
        s.log() << condition_diagnostic(c);
        return kExitCondition;
    }
    return kExitOk;
}

int cmd_carleman_verify(Session& s) {
    const auto& cfg = s.cfg();
    const auto& geom = cfg.geometry;
    const auto& kc = cfg.carleman;
    const ControlTimeReport rep = compute_report(geom);
    const CarlemanParams p = cfg.carleman_params();
    const ConditionReport cond = verify_conditions(p, geom);
    if (!cond.all()) {
        s.log() << "beta = " << format_double(p.beta) << " is not admissible\n"
                << condition_diagnostic(cond);
        return kExitCondition;
    }
    int code = kExitOk;

    {
        CarlemanParams pid;
        pid.beta = kc.identity_beta;
        pid.lambda = kc.identity_lambda;
        pid.mu = kc.identity_mu;
        pid.alpha = rep.alpha;
        auto csv = s.table("identity", {"nx", "h", "dt", "residual", "relative", "order"});
        double prev = 0.0;
        for (int nx : kc.ladder) {
            const Grid g = cube_grid(geom, nx, kc.ladder_steps_per_cell * nx);
            IdentityInput in;
            if (kc.identity_case == "manufactured") {
                ManufacturedCase mc = manufactured_case(g);
                in.u = std::move(mc.m);
                in.uhat = std::move(mc.m_t);
            } else {
                in.u.assign(static_cast<std::size_t>(g.steps() + 1), g.zeros());
                in.uhat = in.u;
            }
            const IdentityResidual r = identity_residual(g, pid, geom, in);
            const CsvCell order = prev > 0.0 && r.residual > 0.0 ? CsvCell(std::log2(prev / r.residual))
                                                                : CsvCell(std::string());
            csv.row({static_cast<long>(nx), g.min_h(), g.dt(), r.residual, r.relative(), order});
            s.log() << "identity nx=" << nx << " residual " << format_double(r.residual) << "\n";
            prev = r.residual;
        }
    }

    if (cfg.mc.paths > 0) {
        CarlemanParams pid;
        pid.beta = kc.identity_beta;
        pid.lambda = kc.identity_lambda;
        pid.mu = kc.identity_mu;
        pid.alpha = rep.alpha;
        const Grid g = cube_grid(geom, kc.mc_nx, kc.mc_steps);
        const ManufacturedCase mc = manufactured_case(g, kc.mc_noise);
        const ExpectedResidual e = expected_identity_residual(g, pid, geom, mc.m, mc.m_t, mc.q,
                                                              cfg.mc.paths, cfg.mc.seed, cfg.workers());
        auto csv = s.table("identity_mc", {"quantity", "mean", "ci", "M"});
        csv.row({"integrated_residual", e.estimate.mean, e.estimate.ci_halfwidth,
                 static_cast<long>(e.estimate.count)});
        csv.row({"bracket_scale", e.scale, 0.0, static_cast<long>(e.estimate.count)});
        s.log() << "stochastic identity: mean " << format_double(e.estimate.mean) << " +- "
                << format_double(e.estimate.ci_halfwidth) << (e.within_ci() ? " (0 inside CI)\n" : " (0 outside CI)\n");
    }

    {
        const Grid g = cfg.grid();
        auto csv = s.table("positivity", {"lambda", "mu", "nodes", "bv2_violations", "bv2_min_margin",
                                          "zd1_violations", "zd1_min_margin", "zd3_violations",
                                          "zd3_skipped", "zd3_min_ratio", "status"});
        for (double lambda : kc.positivity_lambdas) {
            for (double mu : kc.positivity_mus) {
                CarlemanParams q = p;
                q.lambda = lambda;
                q.mu = mu;
                const PositivityReport r =
                    positivity_checks(g, q, geom, kc.positivity_samples, cfg.mc.seed, kc.check_zd3);
                const bool ok = r.ok(kc.check_zd3);
                const double nan = std::numeric_limits<double>::quiet_NaN();
                csv.row({lambda, mu, r.nodes_checked, r.bv2_violations, r.bv2_min_margin,
                         r.zd1_violations, r.zd1_min_margin, r.zd3_evaluated ? CsvCell(r.zd3_violations) : CsvCell(nan),
                         r.zd3_evaluated ? CsvCell(r.zd3_skipped) : CsvCell(nan),
                         r.zd3_evaluated ? CsvCell(r.zd3_min_ratio) : CsvCell(nan),
                         std::string(ok ? "pass" : "fail")});
                if (!ok) {
                    s.log() << "positivity check failed at lambda=" << format_double(lambda)
                            << " mu=" << format_double(mu) << "\n";
                    code = kExitCondition;
                }
            }
        }
    }

    if (kc.ratio_nx > 0) {
        const Grid g = cube_grid(geom, kc.ratio_nx, kc.ratio_steps_per_cell * kc.ratio_nx);
        const CoefficientSet coeffs = cfg.coefficient_set();
        coeffs.validate(g);
        const AdjointTrajectory tr =
            AdjointSolver(g, coeffs).solve(terminal_datum(g, cfg.control.zT, cfg.control.zhatT));
        auto csv = s.table("carleman_ratio",
                           {"lambda", "mu", "lhs", "rhs", "ratio", "resolution", "degenerate"});
        for (double lambda : kc.ratio_lambdas) {
            for (double mu : kc.ratio_mus) {
                CarlemanParams q = p;
                q.lambda = lambda;
                q.mu = mu;
                if (kc.ratio_delta > 0.0) q.delta = kc.ratio_delta;
                const CarlemanRatio r = carleman_ratio(g, q, geom, tr, coeffs, rep.gamma0);
                csv.row({lambda, mu, r.lhs, r.rhs, r.ratio, r.resolution, static_cast<long>(r.degenerate)});
            }
        }
    }
    return code;
}

int cmd_observability(Session& s) {
    const auto& cfg = s.cfg();
    const ControlTimeReport rep = compute_report(cfg.geometry);
    const Grid base = cfg.grid();
    const CoefficientSet coeffs = cfg.coefficient_set();
    std::vector<TerminalData> family;
    for (const auto& name : cfg.control.family) {
        if (name == "config") family.push_back(terminal_datum(base, cfg.control.zT, cfg.control.zhatT));
        else family.push_back(named_datum(base, name));
    }
    const auto rows = tstar_scan(base, coeffs, rep.gamma0, family, cfg.control.scan_T, cfg.workers());

    auto scan = s.table("scan", {"T", "ratio", "worst_member", "degenerate_members"});
    auto members = s.table("scan_members", {"T", "member", "ratio"});
    bool any = false;
    for (const auto& r : rows) {
        long degenerate = 0;
        for (std::size_t i = 0; i < r.ratios.size(); ++i) {
            if (std::isinf(r.ratios[i])) ++degenerate;
            members.row({r.T, cfg.control.family[i], r.ratios[i]});
        }
        const std::string worst = r.worst_member >= 0 ? cfg.control.family[r.worst_member] : "";
        scan.row({r.T, r.worst_member >= 0 ? r.worst_ratio : std::numeric_limits<double>::infinity(),
                  worst, degenerate});
        any = any || r.worst_member >= 0;
        s.log() << "T=" << format_double(r.T) << " ratio " << format_double(r.worst_ratio) << "\n";
    }
    if (!any) {
        s.log() << "every scan point is degenerate\n";
        return kExitDegenerate;
    }
    return kExitOk;
}

int cmd_control(Session& s) {
    const auto& cfg = s.cfg();
    const auto& geom = cfg.geometry;
    const ControlTimeReport rep = compute_report(geom);
    if (!(geom.kappa * geom.T > rep.Tstar)) {
        if (cfg.control.strict) {
            s.log() << "refusing to run: kappa*T = " << format_double(geom.kappa * geom.T)
                    << " does not exceed Tstar = " << format_double(rep.Tstar) << "\n";
            return kExitCondition;
        }
        s.log() << "warning: kappa*T does not exceed Tstar; controllability is not guaranteed\n";
    }
    const Grid g = cfg.grid();
    const CoefficientSet coeffs = cfg.coefficient_set();
    const auto& cc = cfg.control;
    const Field y0 = boundary_zeroed(g, expression_field(g, cc.y0, 0.0));
    const Field yhat0 = boundary_zeroed(g, expression_field(g, cc.yhat0, 0.0));
    const Field y1 = boundary_zeroed(g, expression_field(g, cc.y1, g.T()));
    const Field yhat1 = boundary_zeroed(g, expression_field(g, cc.yhat1, g.T()));
    HumOptions opt;
    opt.tol = cc.tol;
    opt.max_iter = cc.max_iter;
    opt.filter = cc.filter;
    opt.filter_fraction = cc.filter_fraction;
    const HumResult h = hum_solve(g, coeffs, rep.gamma0, y0, yhat0, y1, yhat1, opt);

    {
        auto csv = s.table("cg_log", {"iteration", "residual", "terminal_error"});
        for (const auto& it : h.log) csv.row({static_cast<long>(it.iteration), it.residual, it.terminal_error});
    }
    {
        auto csv = s.table("control_summary", {"quantity", "value"});
        csv.row({"T", g.T()});
        csv.row({"Tstar", rep.Tstar});
        csv.row({"uncontrolled_error", h.uncontrolled_error});
        csv.row({"achieved_error", h.achieved_error});
        csv.row({"reduction", h.uncontrolled_error > 0.0 ? h.achieved_error / h.uncontrolled_error : 0.0});
        csv.row({"iterations", static_cast<long>(h.iterations)});
        csv.row({"converged", static_cast<long>(h.converged)});
    }
    if (cfg.output.dump) {
        const int stride = cfg.output.stride;
        auto csv = s.table("controls", {"t", "node", "f", "g", "h"});
        for (int k = 0; k <= g.steps(); k += stride) {
            for (std::size_t n = 0; n < g.size(); ++n) {
                const bool step = k < g.steps();
                const double f = step && !h.controls.f.empty() ? h.controls.f[k][n] : 0.0;
                const double gg = step && !h.controls.g.empty() ? h.controls.g[k][n] : 0.0;
                const double hh = !h.controls.h.empty() ? h.controls.h[k][n] : 0.0;
                csv.row({g.time(k), static_cast<long>(n), f, gg, hh});
            }
        }
        ForwardOptions fo;
        fo.stride = stride;
        const ForwardTrajectory ft =
            ForwardSolver(g, coeffs, rep.gamma0).solve(y0, yhat0, h.controls, nullptr, fo);
        auto traj = s.table("trajectory", {"t", "node", "y", "yhat"});
        for (std::size_t l = 0; l < ft.levels.size(); ++l)
            for (std::size_t n = 0; n < g.size(); ++n)
                traj.row({g.time(ft.levels[l]), static_cast<long>(n), ft.y[l][n], ft.yhat[l][n]});
    }
    s.log() << "HUM: " << h.iterations << " iterations, terminal error "
            << format_double(h.achieved_error) << " (uncontrolled " << format_double(h.uncontrolled_error)
            << ")\n";
    if (!h.converged) {
        s.log() << "conjugate residual iteration stagnated\n";
        return kExitStagnation;
    }
    return kExitOk;
}

int cmd_energy_check(Session& s) {
    const auto& cfg = s.cfg();
    const ControlTimeReport rep = compute_report(cfg.geometry);
    const Grid g = cfg.grid();
    const CoefficientSet coeffs = cfg.coefficient_set();
    const AdjointTrajectory tr =
        AdjointSolver(g, coeffs).solve(terminal_datum(g, cfg.control.zT, cfg.control.zhatT));
    const double r2 = cfg.r2();
    const EnergyReport e = energy_check(g, coeffs, tr, rep.gamma0, r2);
    {
        auto csv = s.table("energy", {"t", "energy"});
        for (std::size_t k = 0; k < e.energy.size(); ++k) csv.row({g.time(static_cast<int>(k)), e.energy[k]});
    }
    {
        auto csv = s.table("energy_summary", {"quantity", "value"});
        csv.row({"r2", r2});
        csv.row({"fitted_C", e.fitted_C});
        csv.row({"max_relative_drift", e.max_relative_drift});
        csv.row({"forward_bound_ok", static_cast<long>(e.forward_bound_ok)});
        csv.row({"backward_bound_ok", static_cast<long>(e.backward_bound_ok)});
    }
    if (cfg.output.dump) {
        auto csv = s.table("traces", {"t", "face", "node", "value"});
        for (int k = 0; k <= tr.tau_level; k += cfg.output.stride) {
            for (const Face& f : rep.gamma0) {
                const auto fi = tr.face_index(f);
                const auto& nodes = g.face_nodes(f);
                for (std::size_t i = 0; i < nodes.size(); ++i)
                    csv.row({g.time(k), to_string(f), static_cast<long>(nodes[i].boundary), tr.trace[k][fi][i]});
            }
        }
    }
    s.log() << "energy: fitted C " << format_double(e.fitted_C) << ", max relative drift "
            << format_double(e.max_relative_drift) << "\n";
    if (!e.forward_bound_ok || !e.backward_bound_ok) {
        s.log() << "energy band violated\n";
        return kExitCondition;
    }
    return kExitOk;
}

const std::map<std::string, std::function<int(Session&)>>& commands() {
    static const std::map<std::string, std::function<int(Session&)>> m = {
        {"geometry", cmd_geometry},
        {"carleman-verify", cmd_carleman_verify},
        {"observability", cmd_observability},
        {"control", cmd_control},
        {"energy-check", cmd_energy_check},
    };
    return m;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"geometry", "carleman-verify", "observability",
                                                   "control", "energy-check"};
    return names;
}

CommandOutcome run_command(const std::string& command, const RawConfig& raw, std::ostream& log) {
    CommandOutcome out;
    const auto it = commands().find(command);
    if (it == commands().end()) {
        log << "error: unknown command '" << command << "'\n";
        out.code = kExitUsage;
        return out;
    }
    try {
        const ExperimentConfig cfg = ExperimentConfig::from_raw(raw);
        Session session(cfg, log, out);
        out.code = it->second(session);
    } catch (const GeometryError& e) {
        log << "geometry error: " << e.what() << "\n";
        out.code = kExitGeometry;
    } catch (const ConditionError& e) {
        log << "condition error: " << e.what() << "\n";
        out.code = kExitCondition;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        out.code = kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        log << "error: " << e.what() << "\n";
        out.code = kExitUsage;
    }
    return out;
}

CommandOutcome run_command(const std::string& command, const std::string& config_path,
                           std::ostream& log) {
    try {
        return run_command(command, RawConfig::from_file(config_path), log);
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return {kExitUsage, {}};
    }
}

}  // namespace rswave::cli
