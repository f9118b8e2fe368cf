#include "scdma/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "scdma/continuum.hpp"
#include "scdma/coupling.hpp"
#include "scdma/de_core.hpp"
#include "scdma/scalar_channel.hpp"
#include "scdma/thresholds.hpp"

namespace scdma::cli {
namespace {

using nlohmann::json;

// 17 significant digits: doubles round-trip, so identical configs diff clean.
std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(std::ostream& os, const Table& t) {
    auto line = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

int emit(const RunConfig& rc, std::ostream& out, std::ostream& err, const Table& table,
         const json& doc) {
    auto writer = [&](std::ostream& os) {
        if (rc.format == "json")
            os << doc.dump(2) << '\n';
        else
            write_csv(os, table);
    };
    if (rc.output.empty()) {
        writer(out);
        out.flush();
        return 0;
    }
    std::ofstream f(rc.output);
    if (!f) {
        err << "scdma: cannot open output file: " << rc.output << '\n';
        return 2;
    }
    writer(f);
    f.flush();
    if (!f) {
        err << "scdma: write failed: " << rc.output << '\n';
        return 2;
    }
    return 0;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::domain_error(msg);
}

QuadratureSpec quad_of(const RunConfig& rc) {
    QuadratureSpec q;
    q.node_count = rc.nodes;
    return q;
}

CouplingSpec family_of(const RunConfig& rc, double beta = 1.0) {
    CouplingSpec s;
    if (rc.kind == "uncoupled")
        s.kind = CouplingKind::uncoupled;
    else if (rc.kind == "circular")
        s.kind = CouplingKind::circular;
    else
        throw std::domain_error("kind must be 'circular' or 'uncoupled'");
    s.L = rc.L;
    s.W = rc.W;
    s.beta = beta;
    s.beta_init = rc.beta_init;
    return s;
}

ThresholdQuery query_of(const RunConfig& rc) {
    ThresholdQuery q;
    q.family = family_of(rc);
    q.sigma2 = sigma2_from_snr_db(rc.snr_db);
    q.beta_lo = rc.beta_lo;
    q.beta_hi = rc.beta_hi;
    q.tol = rc.tol;
    q.match_tol = rc.match_tol;
    q.de_tol = rc.de_tol;
    q.de_max_iter = rc.de_max_iter;
    q.quad = quad_of(rc);
    return q;
}

double require_beta(const RunConfig& rc, const char* cmd) {
    if (std::isnan(rc.beta)) throw std::domain_error(std::string(cmd) + ": --beta is required");
    return rc.beta;
}

int cmd_xi(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    QuadratureSpec q = quad_of(rc);
    std::vector<double> zs;
    if (rc.z > 0.0) {
        zs.push_back(rc.z);
    } else {
        require(rc.points >= 1, "xi: need a non-empty range (--points >= 1)");
        require(rc.z_min > 0.0 && rc.z_max >= rc.z_min, "xi: need 0 < z-min <= z-max");
        if (rc.points == 1)
            zs.push_back(rc.z_min);
        else
            for (int i = 0; i < rc.points; ++i)
                zs.push_back(rc.z_min * std::pow(rc.z_max / rc.z_min, i / (rc.points - 1.0)));
    }
    Table t{{"z", "xi"}, {}};
    json rows = json::array();
    for (double z : zs) {
        double xi = mse_qpsk(NoiseLevel(z), q);
        t.rows.push_back({fmt(z), fmt(xi)});
        rows.push_back({{"z", z}, {"xi", xi}});
    }
    json doc{{"command", "xi"}, {"nodes", rc.nodes}, {"rows", rows}};
    return emit(rc, out, err, t, doc);
}

int cmd_de(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    double beta = require_beta(rc, "de");
    CouplingSpec spec = family_of(rc, beta);
    CouplingSystem sys = build_system(spec, sigma2_from_snr_db(rc.snr_db));
    std::vector<std::pair<std::string, InitMode>> inits;
    if (rc.init == "worst" || rc.init == "both") inits.push_back({"worst", InitMode::worst()});
    if (rc.init == "genie" || rc.init == "both") inits.push_back({"genie", InitMode::genie()});
    require(!inits.empty(), "de: --init must be worst, genie, or both");
    Table t{{"init", "l", "sir", "mse"}, {}};
    json sols = json::array();
    bool all_converged = true;
    for (auto& [name, mode] : inits) {
        DESolution sol = de_solve(sys, mode, rc.de_tol, rc.de_max_iter, quad_of(rc));
        all_converged = all_converged && sol.converged;
        for (int l = 0; l < sys.L(); ++l)
            t.rows.push_back({name, std::to_string(l), fmt(sol.sir[l]), fmt(sol.mse[l])});
        json js = solution_to_json(sol);
        js["init"] = name;
        sols.push_back(js);
    }
    json doc{{"command", "de"},
             {"system", spec_to_json(spec, -rc.snr_db)},
             {"solutions", sols}};
    int code = emit(rc, out, err, t, doc);
    if (code != 0) return code;
    if (!all_converged) {
        err << "scdma: density evolution did not converge within the iteration budget\n";
        return 3;
    }
    return 0;
}

int cmd_threshold(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    ThresholdQuery q = query_of(rc);
    double value = 0.0;
    if (rc.threshold_kind == "bp")
        value = rc.scan_step > 0.0 ? bp_threshold_scanned(q, rc.scan_step) : bp_threshold(q);
    else if (rc.threshold_kind == "io")
        value = q.family.kind == CouplingKind::uncoupled
                    ? io_threshold_uncoupled(q.sigma2, q.beta_lo, q.beta_hi, q.tol, q.quad)
                    : io_threshold_coupled(q.family, q.sigma2, q.beta_lo, q.beta_hi, q.tol, q.quad);
    else if (rc.threshold_kind == "potential")
        value = potential_threshold(q.sigma2, q.beta_lo, q.beta_hi, q.tol, q.quad);
    else
        throw std::domain_error("threshold: --threshold-kind must be bp, io, or potential");
    Table t{{"kind", "family", "snr_db", "L", "W", "beta_init", "threshold", "tolerance"}, {}};
    t.rows.push_back({rc.threshold_kind, rc.kind, fmt(rc.snr_db), std::to_string(rc.L),
                      std::to_string(rc.W), fmt(rc.beta_init), fmt(value), fmt(rc.tol)});
    json doc = threshold_to_json(rc.threshold_kind, q.family, rc.snr_db, value, rc.tol);
    doc["command"] = "threshold";
    return emit(rc, out, err, t, doc);
}

int cmd_potential(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    double beta = require_beta(rc, "potential");
    require(rc.points >= 2, "potential: need --points >= 2");
    require(rc.y_min > 0.0 && rc.y_min < rc.y_max && rc.y_max < 1.0,
            "potential: need 0 < y-min < y-max < 1");
    std::vector<double> grid(rc.points);
    for (int i = 0; i < rc.points; ++i)
        grid[i] = rc.y_min * std::pow(rc.y_max / rc.y_min, i / (rc.points - 1.0));
    PotentialProfile prof = potential(beta, sigma2_from_snr_db(rc.snr_db), grid, quad_of(rc));
    Table t{{"y", "U", "stationary", "minimum"}, {}};
    json rows = json::array(), st = json::array();
    for (std::size_t i = 0; i < prof.y.size(); ++i) {
        t.rows.push_back({fmt(prof.y[i]), fmt(prof.U[i]), "0", "0"});
        rows.push_back({{"y", prof.y[i]}, {"U", prof.U[i]}});
    }
    for (const auto& sp : prof.stationary) {
        t.rows.push_back({fmt(sp.y), fmt(sp.U), "1", sp.is_minimum ? "1" : "0"});
        st.push_back({{"y", sp.y}, {"U", sp.U}, {"minimum", sp.is_minimum}});
    }
    json doc{{"command", "potential"}, {"snr_db", rc.snr_db}, {"beta", beta},
             {"rows", rows},           {"stationary", st}};
    return emit(rc, out, err, t, doc);
}

int cmd_sumrate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    require(rc.beta_step > 0.0, "sumrate: need --beta-step > 0");
    require(rc.beta_lo <= rc.beta_hi, "sumrate: need beta-lo <= beta-hi");
    Table t{{"beta", "rate", "infinite_init_spreading"}, {}};
    json rows = json::array();
    for (double b = rc.beta_lo; b <= rc.beta_hi + 1e-12; b += rc.beta_step) {
        SumRate r = sum_rate(b, rc.beta_init, rc.W, rc.L);
        t.rows.push_back({fmt(b), fmt(r.rate), r.infinite_init_spreading ? "1" : "0"});
        rows.push_back({{"beta", b},
                        {"rate", r.rate},
                        {"infinite_init_spreading", r.infinite_init_spreading}});
    }
    json doc{{"command", "sumrate"}, {"L", rc.L},    {"W", rc.W},
             {"beta_init", rc.beta_init}, {"rows", rows}};
    return emit(rc, out, err, t, doc);
}

int cmd_continuum(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    ContinuumFamily fam;
    double default_beta = 0.0;
    if (rc.model == "quartic") {
        int M = rc.M > 0 ? rc.M : 129;
        double ss = rc.step_scale > 0.0 ? rc.step_scale : 0.13;
        double c = rc.D >= 0.0 ? rc.D * (M - 1.0) * (M - 1.0) : 2.0;
        fam = quartic_double_well_family(c, M, ss);
        default_beta = 0.05;
    } else if (rc.model == "cdma") {
        int M = rc.M > 0 ? rc.M : 65;
        double ss = rc.step_scale > 0.0 ? rc.step_scale : 0.25;
        fam = cdma_continuum_family(sigma2_from_snr_db(rc.snr_db), rc.L, rc.W, M, ss,
                                    quad_of(rc));
        if (rc.D >= 0.0) {
            double d = rc.D;
            fam.diffusion = [d](double) { return d; };
        }
        default_beta = 1.7;
    } else {
        throw std::domain_error("continuum: --model must be quartic or cdma");
    }
    fam.max_iter = rc.max_iter;
    fam.tol = rc.cont_tol;
    fam.uniform_tol = rc.uniform_tol;

    if (rc.cont_threshold) {
        double value = continuum_bp_threshold(fam, rc.beta_lo, rc.beta_hi, rc.tol);
        double dref = fam.diffusion(value);
        Table t{{"model", "threshold", "D", "M", "tolerance"}, {}};
        t.rows.push_back({rc.model, fmt(value), fmt(dref), std::to_string(fam.M), fmt(rc.tol)});
        json doc{{"command", "continuum"}, {"mode", "threshold"}, {"model", rc.model},
                 {"threshold", value},     {"D", dref},           {"M", fam.M},
                 {"tolerance", rc.tol}};
        return emit(rc, out, err, t, doc);
    }

    double beta = std::isnan(rc.beta) ? default_beta : rc.beta;
    ContinuumConfig cfg;
    cfg.u_prime = fam.u_prime_at(beta);
    if (fam.u_second_at) cfg.u_second = fam.u_second_at(beta);
    cfg.D = fam.diffusion(beta);
    cfg.M = fam.M;
    cfg.y_bnd = fam.y_boundary(beta);
    cfg.max_iter = rc.max_iter;
    cfg.tol = rc.cont_tol;
    cfg.step_scale = fam.step_scale;

    require(rc.snapshots >= 1, "continuum: need --snapshots >= 1");
    const long interval = std::max(1L, rc.max_iter / rc.snapshots);

    ContinuumState st;
    st.y.assign(cfg.M, fam.y_metastable(beta));
    st.y.front() = st.y.back() = cfg.y_bnd;
    std::vector<ContinuumState> snaps{st};
    bool converged = false;
    while (st.iteration < cfg.max_iter) {
        ContinuumState nx = continuum_step(st, cfg);
        double delta = 0.0;
        for (int i = 0; i < cfg.M; ++i) delta = std::max(delta, std::abs(nx.y[i] - st.y[i]));
        st = std::move(nx);
        if (st.iteration % interval == 0) snaps.push_back(st);
        if (delta < cfg.tol) {
            converged = true;
            break;
        }
    }
    if (snaps.back().iteration != st.iteration) snaps.push_back(st);

    Table t{{"iteration", "x", "y"}, {}};
    json jsnaps = json::array();
    for (const auto& s : snaps) {
        json ys = json::array();
        for (int i = 0; i < cfg.M; ++i) {
            t.rows.push_back({std::to_string(s.iteration), fmt(i / (cfg.M - 1.0)), fmt(s.y[i])});
            ys.push_back(s.y[i]);
        }
        jsnaps.push_back({{"iteration", s.iteration}, {"y", ys}});
    }
    json doc{{"command", "continuum"}, {"mode", "profile"},   {"model", rc.model},
             {"beta", beta},           {"D", cfg.D},          {"M", cfg.M},
             {"step_scale", cfg.step_scale}, {"converged", converged},
             {"iterations", st.iteration},   {"snapshots", jsnaps}};
    int code = emit(rc, out, err, t, doc);
    if (code != 0) return code;
    if (!converged) {
        err << "scdma: continuum run did not reach stationarity within the budget\n";
        return 3;
    }
    return 0;
}

// ------------------------------------------------------------------ tables

struct Cell {
    explicit Cell(std::function<double()> f) : compute(std::move(f)) {}
    std::function<double()> compute;
    bool flagged = false;
    std::string flag;
    double value = 0.0;
};

// Cells are independent; ordered assembly afterwards keeps output
// deterministic whatever the completion order.
void run_cells(std::vector<Cell>& cells, int workers) {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> fatal(cells.size());
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
            try {
                cells[i].value = cells[i].compute();
            } catch (const unique_regime_error&) {
                cells[i].flagged = true;
                cells[i].flag = "unique-regime";
            } catch (const bracket_error& e) {
                cells[i].flagged = true;
                cells[i].flag = e.diagnosis() == bracket_error::Diagnosis::both_agree
                                    ? "no-disagreement"
                                    : "no-agreement";
            } catch (...) {
                fatal[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> ts;
        int n = std::min<int>(workers, static_cast<int>(cells.size()));
        for (int w = 0; w < n; ++w) ts.emplace_back(work);
        for (auto& th : ts) th.join();
    }
    for (auto& f : fatal)
        if (f) std::rethrow_exception(f);
}

std::string cell_text(const Cell& c) { return c.flagged ? c.flag : fmt(c.value); }

json cell_json(const Cell& c) {
    if (c.flagged) return json{{"flag", c.flag}};
    return json(c.value);
}

int cmd_tables(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    QuadratureSpec q = quad_of(rc);
    auto base_query = [&](const CouplingSpec& family, double sigma2) {
        ThresholdQuery tq;
        tq.family = family;
        tq.sigma2 = sigma2;
        tq.beta_lo = rc.beta_lo;
        tq.beta_hi = rc.beta_hi;
        tq.tol = rc.tol;
        tq.match_tol = rc.match_tol;
        tq.de_tol = rc.de_tol;
        tq.de_max_iter = rc.de_max_iter;
        tq.quad = q;
        return tq;
    };
    const double step = rc.scan_step;
    require(step > 0.0, "tables: need --scan-step > 0");

    if (rc.table == 1) {
        double snr = rc.snr_list.empty() ? 10.0 : rc.snr_list.front();
        double sigma2 = sigma2_from_snr_db(snr);
        std::vector<int> Ls = rc.L_list.empty() ? std::vector<int>{16, 32, 64} : rc.L_list;
        std::vector<int> Ws = rc.W_list.empty() ? std::vector<int>{0, 1, 2, 3, 4} : rc.W_list;
        std::vector<Cell> cells;
        for (int L : Ls)
            for (int W : Ws) {
                ThresholdQuery tq =
                    base_query({CouplingKind::circular, L, W, 1.0, rc.beta_init}, sigma2);
                cells.push_back(Cell([tq, step] { return bp_threshold_scanned(tq, step); }));
            }
        run_cells(cells, rc.workers);
        Table t{{"L", "W", "bp_threshold"}, {}};
        json rows = json::array();
        std::size_t k = 0;
        for (int L : Ls)
            for (int W : Ws) {
                const Cell& c = cells[k++];
                t.rows.push_back({std::to_string(L), std::to_string(W), cell_text(c)});
                rows.push_back(
                    {{"L", L}, {"W", W}, {"bp_threshold", cell_json(c)}});
            }
        json doc{{"command", "tables"},  {"table", 1},     {"snr_db", snr},
                 {"beta_init", rc.beta_init}, {"cells", rows}};
        return emit(rc, out, err, t, doc);
    }

    if (rc.table == 2) {
        std::vector<double> snrs =
            rc.snr_list.empty() ? std::vector<double>{9.0, 10.0, 12.0, 14.0} : rc.snr_list;
        require(!snrs.empty(), "tables: snr list must be non-empty");
        const int L = rc.L > 1 ? rc.L : 32;
        const int W = rc.W > 0 ? rc.W : 1;
        const CouplingSpec uncoupled{CouplingKind::uncoupled, 1, 0, 1.0, 0.0};
        const CouplingSpec coupled{CouplingKind::circular, L, W, 1.0, rc.beta_init};
        // five cells per SNR, in the reference column order: uncoupled BP,
        // coupled BP (numeric), equal-depth prediction, uncoupled IO,
        // coupled IO bound
        std::vector<Cell> cells;
        for (double snr : snrs) {
            double sigma2 = sigma2_from_snr_db(snr);
            ThresholdQuery uq = base_query(uncoupled, sigma2);
            ThresholdQuery cq = base_query(coupled, sigma2);
            double lo = rc.beta_lo, hi = rc.beta_hi, tol = rc.tol;
            cells.push_back(Cell([uq, step] { return bp_threshold_scanned(uq, step); }));
            cells.push_back(Cell([cq, step] { return bp_threshold_scanned(cq, step); }));
            cells.push_back(Cell(
                [sigma2, lo, hi, tol, q] { return potential_threshold(sigma2, lo, hi, tol, q); }));
            cells.push_back(Cell(
                [sigma2, lo, hi, tol, q] { return io_threshold_uncoupled(sigma2, lo, hi, tol, q); }));
            cells.push_back(Cell([coupled, sigma2, lo, hi, tol, q] {
                return io_threshold_coupled(coupled, sigma2, lo, hi, tol, q);
            }));
        }
        run_cells(cells, rc.workers);
        Table t{{"snr_db", "bp_uncoupled", "bp_coupled", "potential_prediction", "io_uncoupled",
                 "io_coupled"},
                {}};
        json rows = json::array();
        for (std::size_t i = 0; i < snrs.size(); ++i) {
            const Cell* c = &cells[5 * i];
            t.rows.push_back({fmt(snrs[i]), cell_text(c[0]), cell_text(c[1]), cell_text(c[2]),
                              cell_text(c[3]), cell_text(c[4])});
            rows.push_back({{"snr_db", snrs[i]},
                            {"bp_uncoupled", cell_json(c[0])},
                            {"bp_coupled", cell_json(c[1])},
                            {"potential_prediction", cell_json(c[2])},
                            {"io_uncoupled", cell_json(c[3])},
                            {"io_coupled", cell_json(c[4])}});
        }
        json doc{{"command", "tables"}, {"table", 2}, {"L", L}, {"W", W},
                 {"beta_init", rc.beta_init}, {"rows", rows}};
        return emit(rc, out, err, t, doc);
    }

    throw std::domain_error("tables: --table must be 1 or 2");
}

int dispatch(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    require(std::isfinite(rc.snr_db), "snr-db must be finite");
    require(rc.format == "csv" || rc.format == "json", "format must be csv or json");
    require(rc.workers >= 1, "workers must be >= 1");
    if (rc.command == "xi") return cmd_xi(rc, out, err);
    if (rc.command == "de") return cmd_de(rc, out, err);
    if (rc.command == "threshold") return cmd_threshold(rc, out, err);
    if (rc.command == "potential") return cmd_potential(rc, out, err);
    if (rc.command == "continuum") return cmd_continuum(rc, out, err);
    if (rc.command == "sumrate") return cmd_sumrate(rc, out, err);
    if (rc.command == "tables") return cmd_tables(rc, out, err);
    throw std::domain_error("unknown command '" + rc.command + "' (try --help)");
}

void apply_json(const json& j, RunConfig& rc) {
    if (!j.is_object()) throw std::domain_error("config root must be a JSON object");
    static const std::set<std::string> known{
        "command",   "snr_db",    "L",          "W",           "beta",       "beta_init",
        "kind",      "init",      "z",          "z_min",       "z_max",      "points",
        "y_min",     "y_max",     "beta_lo",    "beta_hi",     "beta_step",  "nodes",
        "de_tol",    "de_max_iter", "tol",      "match_tol",   "scan_step",  "threshold_kind",
        "model",     "M",         "D",          "step_scale",  "max_iter",   "cont_tol",
        "snapshots", "cont_threshold", "uniform_tol", "table", "snr_list",   "L_list",
        "W_list",    "output",    "format",     "workers"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::domain_error("unknown config key: " + it.key());
    rc.command = j.value("command", rc.command);
    rc.snr_db = j.value("snr_db", rc.snr_db);
    rc.L = j.value("L", rc.L);
    rc.W = j.value("W", rc.W);
    rc.beta = j.value("beta", rc.beta);
    rc.beta_init = j.value("beta_init", rc.beta_init);
    rc.kind = j.value("kind", rc.kind);
    rc.init = j.value("init", rc.init);
    rc.z = j.value("z", rc.z);
    rc.z_min = j.value("z_min", rc.z_min);
    rc.z_max = j.value("z_max", rc.z_max);
    rc.points = j.value("points", rc.points);
    rc.y_min = j.value("y_min", rc.y_min);
    rc.y_max = j.value("y_max", rc.y_max);
    rc.beta_lo = j.value("beta_lo", rc.beta_lo);
    rc.beta_hi = j.value("beta_hi", rc.beta_hi);
    rc.beta_step = j.value("beta_step", rc.beta_step);
    rc.nodes = j.value("nodes", rc.nodes);
    rc.de_tol = j.value("de_tol", rc.de_tol);
    rc.de_max_iter = j.value("de_max_iter", rc.de_max_iter);
    rc.tol = j.value("tol", rc.tol);
    rc.match_tol = j.value("match_tol", rc.match_tol);
    rc.scan_step = j.value("scan_step", rc.scan_step);
    rc.threshold_kind = j.value("threshold_kind", rc.threshold_kind);
    rc.model = j.value("model", rc.model);
    rc.M = j.value("M", rc.M);
    rc.D = j.value("D", rc.D);
    rc.step_scale = j.value("step_scale", rc.step_scale);
    rc.max_iter = j.value("max_iter", rc.max_iter);
    rc.cont_tol = j.value("cont_tol", rc.cont_tol);
    rc.snapshots = j.value("snapshots", rc.snapshots);
    rc.cont_threshold = j.value("cont_threshold", rc.cont_threshold);
    rc.uniform_tol = j.value("uniform_tol", rc.uniform_tol);
    rc.table = j.value("table", rc.table);
    rc.snr_list = j.value("snr_list", rc.snr_list);
    rc.L_list = j.value("L_list", rc.L_list);
    rc.W_list = j.value("W_list", rc.W_list);
    rc.output = j.value("output", rc.output);
    rc.format = j.value("format", rc.format);
    rc.workers = j.value("workers", rc.workers);
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    std::string config_path;
    for (std::size_t i = 1; i < argv.size(); ++i) {
        const std::string& a = argv[i];
        if (a == "--config" && i + 1 < argv.size())
            config_path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0)
            config_path = a.substr(9);
    }
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) {
            err << "scdma: cannot open config file: " << config_path << '\n';
            return 2;
        }
        try {
            apply_json(json::parse(f), rc);
        } catch (const std::exception& e) {
            err << "scdma: bad config file: " << e.what() << '\n';
            return 1;
        }
    }

    CLI::App app{"density-evolution analysis of spatially coupled CDMA multiuser detection"};
    app.name("scdma");
    std::string cfg_dummy;
    app.add_option("--config", cfg_dummy, "JSON config file mirroring all flags (flags override)");
    app.add_option("command", rc.command,
                   "one of: xi | de | threshold | potential | continuum | sumrate | tables")
        ->check(CLI::IsMember({"xi", "de", "threshold", "potential", "continuum", "sumrate",
                               "tables"}));
    app.add_option("--snr-db", rc.snr_db, "channel SNR in dB; sigma^2 = 10^(-snr/10)");
    app.add_option("--L", rc.L, "number of coupling periods");
    app.add_option("--W", rc.W, "coupling window width");
    app.add_option("--beta", rc.beta, "system load");
    app.add_option("--beta-init", rc.beta_init, "initialization-phase load");
    app.add_option("--kind", rc.kind, "coupling family: circular | uncoupled")
        ->check(CLI::IsMember({"circular", "uncoupled"}));
    app.add_option("--init", rc.init, "de: initialization, worst | genie | both")
        ->check(CLI::IsMember({"worst", "genie", "both"}));
    app.add_option("--z", rc.z, "xi: single evaluation point (overrides the range)");
    app.add_option("--z-min", rc.z_min, "xi: log-grid start");
    app.add_option("--z-max", rc.z_max, "xi: log-grid end");
    app.add_option("--points", rc.points, "xi/potential: grid size");
    app.add_option("--y-min", rc.y_min, "potential: log-grid start");
    app.add_option("--y-max", rc.y_max, "potential: log-grid end");
    app.add_option("--beta-lo", rc.beta_lo, "bracket / sweep start");
    app.add_option("--beta-hi", rc.beta_hi, "bracket / sweep end");
    app.add_option("--beta-step", rc.beta_step, "sumrate: sweep step");
    app.add_option("--nodes", rc.nodes, "quadrature node count");
    app.add_option("--de-tol", rc.de_tol, "density-evolution update tolerance");
    app.add_option("--de-max-iter", rc.de_max_iter, "density-evolution iteration budget");
    app.add_option("--tol", rc.tol, "threshold bisection width");
    app.add_option("--match-tol", rc.match_tol, "profile-agreement tolerance");
    app.add_option("--scan-step", rc.scan_step,
                   "bp threshold: bracket-narrowing scan step (0 = use the bracket as-is)");
    app.add_option("--threshold-kind", rc.threshold_kind, "threshold: bp | io | potential")
        ->check(CLI::IsMember({"bp", "io", "potential"}));
    app.add_option("--model", rc.model, "continuum: quartic | cdma")
        ->check(CLI::IsMember({"quartic", "cdma"}));
    app.add_option("--M", rc.M, "continuum: grid points (0 = per-model default)");
    app.add_option("--D", rc.D, "continuum: diffusion coefficient (< 0 = per-model default)");
    app.add_option("--step-scale", rc.step_scale,
                   "continuum: relaxation factor (0 = per-model default; 1 = literal map)");
    app.add_option("--max-iter", rc.max_iter, "continuum: iteration budget");
    app.add_option("--cont-tol", rc.cont_tol, "continuum: stationarity tolerance");
    app.add_option("--snapshots", rc.snapshots, "continuum: snapshot count over the budget");
    app.add_flag("--threshold", rc.cont_threshold,
                 "continuum: bisect the uniform/nonuniform boundary instead of one run "
                 "(pass an explicit --beta-lo/--beta-hi bracket, e.g. quartic [-0.15,0.15], "
                 "cdma 10 dB [1.78,1.85])");
    app.add_option("--uniform-tol", rc.uniform_tol,
                   "continuum threshold: max |y - y_bnd| for the uniform outcome");
    app.add_option("--table", rc.table, "tables: 1 (L x W grid) or 2 (per-SNR thresholds)");
    app.add_option("--snr-list", rc.snr_list, "tables: SNR values in dB")->delimiter(',');
    app.add_option("--L-list", rc.L_list, "tables: L values")->delimiter(',');
    app.add_option("--W-list", rc.W_list, "tables: W values")->delimiter(',');
    app.add_option("--output", rc.output, "output file (default: stdout)");
    app.add_option("--format", rc.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--workers", rc.workers, "concurrent sweep cells");

    try {
        std::vector<std::string> args(argv.rbegin(), argv.rend());
        if (!args.empty()) args.pop_back();  // program name
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "scdma: " << e.what() << '\n';
        return 1;
    }
    if (rc.command.empty()) {
        err << "scdma: missing command (try --help)\n";
        return 1;
    }
    try {
        return dispatch(rc, out, err);
    } catch (const std::exception& e) {
        err << "scdma: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace scdma::cli
