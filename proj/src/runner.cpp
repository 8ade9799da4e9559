#include "qprobe/runner.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace qprobe {

namespace {

constexpr const char* kToolVersion = "qprobe 1.0.0";

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

struct Table {
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos)
                t.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        if (!have_header) {
            t.columns = split(line, ',');
            have_header = true;
            continue;
        }
        std::vector<double> row;
        for (const std::string& cell : split(line, ','))
            row.push_back(std::stod(cell));
        t.rows.push_back(std::move(row));
    }
    return t;
}

class ArtifactWriter {
  public:
    ArtifactWriter(const RunConfig& cfg) : cfg_(cfg) {}

    void meta(const std::string& key, const std::string& value) {
        meta_.emplace_back(key, value);
    }
    void meta(const std::string& key, double value) {
        std::ostringstream os;
        os << std::setprecision(17) << value;
        meta(key, os.str());
    }
    void columns(std::vector<std::string> cols) { columns_ = std::move(cols); }
    void row(std::vector<double> r) { rows_.push_back(std::move(r)); }

    void write() const {
        std::ostringstream body;
        if (cfg_.format == "json") {
            nlohmann::json j;
            j["tool"] = kToolVersion;
            for (const auto& [k, v] : meta_) j["meta"][k] = v;
            j["config"] = nlohmann::json::parse(config_json());
            j["columns"] = columns_;
            j["rows"] = rows_;
            body << j.dump(2) << "\n";
        } else {
            body << "# tool=" << kToolVersion << "\n";
            body << "# timestamp="
                 << std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count()
                 << "\n";
            for (const std::string& line : split(cfg_.to_key_values(), '\n'))
                if (!line.empty()) body << "# " << line << "\n";
            for (const auto& [k, v] : meta_) body << "# " << k << "=" << v << "\n";
            for (size_t i = 0; i < columns_.size(); ++i)
                body << columns_[i] << (i + 1 < columns_.size() ? "," : "\n");
            body << std::setprecision(12);
            for (const auto& r : rows_)
                for (size_t i = 0; i < r.size(); ++i)
                    body << r[i] << (i + 1 < r.size() ? "," : "\n");
        }
        if (cfg_.output == "-") {
            std::cout << body.str();
        } else {
            std::ofstream out(cfg_.output);
            if (!out) throw Error("cannot write " + cfg_.output);
            out << body.str();
        }
    }

  private:
    std::string config_json() const {
        nlohmann::json j;
        for (const std::string& line : split(cfg_.to_key_values(), '\n')) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 1);
        }
        return j.dump();
    }
    const RunConfig& cfg_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

QubitMode parse_qubit_mode(const std::string& text) {
    if (text == "naive") return QubitMode::naive;
    if (text == "optimal") return QubitMode::optimal;
    if (text == "optimal+c" || text == "optimal_with_c") return QubitMode::optimal_with_c;
    throw Error("unknown qubit mode '" + text + "' (naive|optimal|optimal+c)");
}

}  // namespace

std::vector<double> GridSpec::points() const {
    if (n < 1) throw Error("grid: need at least one point");
    std::vector<double> pts;
    for (int i = 0; i < n; ++i)
        pts.push_back(n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1));
    return pts;
}

GridSpec GridSpec::parse(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw Error("grid spec must be lo:hi:n, got '" + text + "'");
    GridSpec g;
    try {
        g.lo = std::stod(parts[0]);
        g.hi = std::stod(parts[1]);
        g.n = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw Error("grid spec must be lo:hi:n with numeric fields, got '" + text + "'");
    }
    if (g.n < 1) throw Error("grid spec: need at least one point in '" + text + "'");
    return g;
}

std::string GridSpec::str() const {
    std::ostringstream os;
    os << std::setprecision(17) << lo << ":" << hi << ":" << n;
    return os.str();
}

std::string RunConfig::to_key_values() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "command=" << command << "\nscenario=" << scenario << "\ntheta=" << theta
       << "\nphi=" << phi << "\nr=" << r << "\nnbar=" << nbar << "\nalpha=" << alpha
       << "\na_out=" << a_out << "\nv=" << v << "\nvar_x=" << var_x << "\nvar_p=" << var_p
       << "\np=" << p << "\nn_max=" << n_max << "\nm=" << m
       << "\nqubit_mode=" << qubit_mode << "\ngrid=" << grid.str()
       << "\ngrid2=" << grid2.str() << "\nseed=" << seed << "\noutput=" << output
       << "\nformat=" << format << "\n";
    return os.str();
}

RunConfig RunConfig::from_file(const std::string& path, const RunConfig& defaults) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path);
    RunConfig cfg = defaults;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        try {
            if (key == "command") cfg.command = val;
            else if (key == "scenario") cfg.scenario = val;
            else if (key == "theta") cfg.theta = std::stod(val);
            else if (key == "phi") cfg.phi = std::stod(val);
            else if (key == "r") cfg.r = std::stod(val);
            else if (key == "nbar") cfg.nbar = std::stod(val);
            else if (key == "alpha") cfg.alpha = std::stod(val);
            else if (key == "a_out") cfg.a_out = std::stod(val);
            else if (key == "v") cfg.v = std::stod(val);
            else if (key == "var_x") cfg.var_x = std::stod(val);
            else if (key == "var_p") cfg.var_p = std::stod(val);
            else if (key == "p") cfg.p = std::stod(val);
            else if (key == "n_max") cfg.n_max = std::stoi(val);
            else if (key == "m") cfg.m = std::stoi(val);
            else if (key == "qubit_mode") cfg.qubit_mode = val;
            else if (key == "grid") cfg.grid = GridSpec::parse(val);
            else if (key == "grid2") cfg.grid2 = GridSpec::parse(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "output") cfg.output = val;
            else if (key == "format") cfg.format = val;
            else
                throw Error("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw Error("config line " + std::to_string(lineno) + ": bad value for '" +
                        key + "'");
        }
    }
    return cfg;
}

void RunConfig::validate() const {
    if (scenario != "qubit" && scenario != "squeezed" && scenario != "displaced")
        throw Error("scenario must be qubit|squeezed|displaced, got '" + scenario + "'");
    if (format != "csv" && format != "json")
        throw Error("format must be csv|json, got '" + format + "'");
    if (n_max < 2 || n_max > 256) throw Error("n_max out of range [2, 256]");
    if (m < 0 || m > 16) throw Error("m out of range [0, 16]");
    if (std::abs(r) > 1.5) throw Error("|r| > 1.5 not resolvable at moderate n_max");
    if (nbar < 0) throw Error("nbar must be >= 0");
    parse_qubit_mode(qubit_mode);
}

int run(const RunConfig& cfg) {
    cfg.validate();
    const FockSpace space{cfg.n_max};
    SolverOptions sopts;
    sopts.seed = cfg.seed;
    ArtifactWriter art(cfg);
    int flagged = 0, total = 0;

    if (cfg.command == "scan-squeezed") {
        const BoundaryCurve curve =
            boundary_scan_squeezed(cfg.r, cfg.nbar, cfg.grid.points(), cfg.m, space, sopts);
        art.meta("truncation_deficit", squeezed_thermal(space, cfg.r, cfg.nbar).deficit());
        art.columns({"var_x", "var_p_boundary", "verdict_margin", "flagged"});
        for (size_t i = 0; i < curve.var_x.size(); ++i) {
            art.row({curve.var_x[i], curve.var_p[i], curve.margin[i],
                     double(curve.flagged[i])});
            flagged += curve.flagged[i];
            ++total;
        }
    } else if (cfg.command == "scan-qubit") {
        const QubitCurve curve = boundary_scan_qubit(cfg.grid.points(), cfg.phi,
                                                     parse_qubit_mode(cfg.qubit_mode), sopts);
        art.columns({"theta", "p_max", "flagged"});
        for (size_t i = 0; i < curve.theta.size(); ++i) {
            art.row({curve.theta[i], curve.p_max[i], double(curve.flagged[i])});
            flagged += curve.flagged[i];
            ++total;
        }
    } else if (cfg.command == "scan-displaced") {
        const DisplacedDomainMap map = domain_map_displaced(
            cfg.alpha, cfg.nbar, cfg.grid.points(), cfg.grid2.points(), cfg.m, space, sopts);
        art.meta("truncation_deficit",
                 displaced_thermal(space, cfg.alpha, cfg.nbar).deficit());
        art.columns({"a_out", "v", "label"});
        for (int i = 0; i < int(map.a_out.size()); ++i)
            for (int j = 0; j < int(map.v.size()); ++j) {
                art.row({map.a_out[i], map.v[j], double(map.label(i, j))});
                ++total;
            }
    } else if (cfg.command == "attack-curve") {
        if (cfg.scenario == "squeezed") {
            const DensityMatrix rho0 = squeezed_thermal(space, cfg.r, cfg.nbar);
            const DensityMatrix rho1 = squeezed_thermal(space, -cfg.r, cfg.nbar);
            const ClassicalBoundary cb =
                lagrange_boundary(rho0, rho1, cfg.grid.points());
            art.meta("region_b_level", cb.region_b_level);
            art.meta("region_b_onset", cb.region_b_onset);
            art.columns({"var_x", "var_p", "lambda", "region_b"});
            for (size_t i = 0; i < cb.var_x.size(); ++i) {
                art.row({cb.var_x[i], cb.var_p[i], cb.lambda[i], double(cb.region_b[i])});
                ++total;
            }
        } else if (cfg.scenario == "qubit") {
            art.columns({"theta", "p"});
            for (double theta : cfg.grid.points()) {
                art.row({theta, qubit_eb_threshold(theta, cfg.phi).p});
                ++total;
            }
        } else {
            throw Error("attack-curve supports scenarios squeezed|qubit");
        }
    } else if (cfg.command == "verify-point") {
        VerificationResult vr;
        if (cfg.scenario == "squeezed") {
            GaussianParams gp;
            gp.r = cfg.r;
            gp.nbar = cfg.nbar;
            const CvScenario sc = cv_ensemble(CvKind::squeezed, gp, space);
            MeasuredMoments mm;
            mm.var_x0 = cfg.var_x;
            mm.var_p0 = cfg.var_p;
            const double s = std::abs(sc.source.overlap);
            EvmTemplate t =
                cfg.m == 0
                    ? template_squeezed(mm, s)
                    : template_with_C_unitaries(
                          template_squeezed_with_identity(mm, s), sc.source,
                          generalized_spin_operators(space.dim(), cfg.m));
            vr = feasibility(t, sopts);
        } else if (cfg.scenario == "displaced") {
            GaussianParams gp;
            gp.nbar = cfg.nbar;
            gp.alpha = cfg.alpha;
            const CvScenario sc = cv_ensemble(CvKind::displaced, gp, space);
            const DisplacedMoments dm = DisplacedMoments::symmetric(cfg.a_out, cfg.v);
            const double s = std::abs(sc.source.overlap);
            EvmTemplate t =
                cfg.m == 0
                    ? template_displaced(dm, s)
                    : template_with_C_unitaries(
                          template_displaced(dm, s), sc.source,
                          generalized_spin_operators(space.dim(), cfg.m));
            vr = feasibility(t, sopts);
        } else {
            const QubitScenario sc = qubit_ensemble(cfg.theta, cfg.phi);
            const QubitMode mode = parse_qubit_mode(cfg.qubit_mode);
            PurifiedSource src = sc.source;
            if (mode != QubitMode::naive) {
                const PurificationPair pp = optimal_purification_pair(
                    sc.ensemble.states[0], sc.ensemble.states[1]);
                src = source_from_purifications(pp.psi0, pp.psi1, 2, 2);
            }
            const EvmTemplate t =
                template_qubit(depolarize(sc.ensemble.states[0], cfg.p),
                               depolarize(sc.ensemble.states[1], cfg.p), src,
                               mode == QubitMode::optimal_with_c);
            vr = feasibility(t, sopts);
        }
        nlohmann::json j;
        j["tool"] = kToolVersion;
        j["t_star"] = vr.t_star;
        j["upper_bound"] = vr.upper_bound;
        j["verdict"] = to_string(vr.verdict);
        j["iterations"] = vr.iterations;
        j["runtime_s"] = vr.runtime_s;
        if (cfg.output == "-") {
            std::cout << j.dump(2) << "\n";
        } else {
            std::ofstream out(cfg.output);
            if (!out) throw Error("cannot write " + cfg.output);
            out << j.dump(2) << "\n";
        }
        return 0;
    } else {
        throw Error("unknown command '" + cfg.command + "'");
    }
    art.write();
    return (total > 0 && flagged * 10 > total) ? 2 : 0;
}

GapReport compare(const std::string& file1, const std::string& file2) {
    const Table t1 = read_table(file1), t2 = read_table(file2);
    if (t1.rows.size() != t2.rows.size())
        throw Error("compare: row count mismatch (" + std::to_string(t1.rows.size()) +
                    " vs " + std::to_string(t2.rows.size()) + ")");
    GapReport rep;
    for (size_t i = 0; i < t1.rows.size(); ++i) {
        if (t1.rows[i].empty() || t2.rows[i].empty() ||
            std::abs(t1.rows[i][0] - t2.rows[i][0]) > 1e-9)
            throw Error("compare: grid mismatch at row " + std::to_string(i));
        const double gap = std::abs(t1.rows[i][1] - t2.rows[i][1]);
        rep.max_gap = std::max(rep.max_gap, gap);
        rep.mean_gap += gap;
        ++rep.n_points;
    }
    if (rep.n_points) rep.mean_gap /= rep.n_points;
    return rep;
}

std::string emit_plot(const std::string& data_file) {
    const Table t = read_table(data_file);
    const std::string script_path = data_file + ".plot.py";
    std::ofstream out(script_path);
    if (!out) throw Error("cannot write " + script_path);
    out << "#!/usr/bin/env python3\n"
        << "import csv\n"
        << "import matplotlib.pyplot as plt\n\n"
        << "rows = []\n"
        << "with open(" << std::quoted(data_file) << ") as fh:\n"
        << "    for line in fh:\n"
        << "        if line.startswith('#') or not line.strip():\n"
        << "            continue\n"
        << "        rows.append(line.strip().split(','))\n"
        << "header, data = rows[0], [[float(x) for x in r] for r in rows[1:]]\n"
        << "cols = {name: [r[i] for r in data] for i, name in enumerate(header)}\n";
    if (!t.columns.empty() && t.columns[0] == "var_x" && t.columns.size() >= 2) {
        out << "import numpy as np\n"
            << "plt.plot(cols['var_x'], cols['" << t.columns[1] << "'], '-o', ms=3)\n"
            << "xs = np.linspace(min(cols['var_x']), max(cols['var_x']), 400)\n"
            << "plt.fill_between(xs, 0, 0.25 / xs, alpha=0.3, color='gray',\n"
            << "                 label='uncertainty-excluded')\n"
            << "plt.xlabel(r'Var($\\hat{x}$)')\nplt.ylabel(r'Var($\\hat{p}$)')\n"
            << "plt.legend()\n";
    } else if (!t.columns.empty() && t.columns[0] == "theta") {
        out << "plt.plot(cols['theta'], cols['" << t.columns[1] << "'], '-o', ms=3)\n"
            << "plt.xlabel(r'$\\theta$')\nplt.ylabel('" << t.columns[1] << "')\n";
    } else if (!t.columns.empty() && t.columns[0] == "a_out") {
        out << "import numpy as np\n"
            << "a = sorted(set(cols['a_out'])); v = sorted(set(cols['v']))\n"
            << "grid = np.full((len(v), len(a)), np.nan)\n"
            << "for aa, vv, ll in zip(cols['a_out'], cols['v'], cols['label']):\n"
            << "    grid[v.index(vv), a.index(aa)] = ll\n"
            << "plt.pcolormesh(a, v, grid, shading='nearest')\n"
            << "plt.xlabel(r'$a_{out}$')\nplt.ylabel('V')\nplt.colorbar(label='label')\n";
    } else {
        throw Error("emit_plot: unrecognized data schema in " + data_file);
    }
    out << "plt.tight_layout()\nplt.savefig(" << std::quoted(data_file + ".png")
        << ", dpi=160)\n";
    return script_path;
}

}  // namespace qprobe
