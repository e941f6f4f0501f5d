#include "mdir/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mdir/error.hpp"
#include "mdir/logrank.hpp"
#include "mdir/permute.hpp"
#include "mdir/simstudy.hpp"
#include "mdir/weights.hpp"

namespace mdir {

namespace {

using nlohmann::json;

// Problems with the command line or a config document; mapped to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double parse_time(const std::string& token, const std::string& where) {
    const std::string t = trim(token);
    if (t.empty()) fail(errc::bad_input, where + ": empty time field");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        fail(errc::bad_input, where + ": cannot parse time '" + t + "'");
    if (v < 0.0) fail(errc::bad_input, where + ": negative time " + t);
    return v;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Writes the whole document at once so failed runs leave no partial files.
void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) fail(errc::bad_input, "cannot open output file " + out_path);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) fail(errc::bad_input, "failed writing output file " + out_path);
}

}  // namespace

std::vector<RawRecord> read_survival_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(errc::bad_input, "cannot open input file " + path);
    std::vector<RawRecord> records;
    std::string line;
    long lineno = 0;
    bool header_seen = false;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        auto parts = split(line, ',');
        if (!header_seen) {
            if (parts.size() != 3 || lower(trim(parts[0])) != "time" ||
                lower(trim(parts[1])) != "status" || lower(trim(parts[2])) != "group")
                fail(errc::bad_input, where + ": expected header 'time,status,group'");
            header_seen = true;
            continue;
        }
        if (parts.size() != 3)
            fail(errc::bad_input,
                 where + ": expected 3 fields, got " + std::to_string(parts.size()));
        RawRecord rec;
        rec.time = parse_time(parts[0], where);
        const std::string st = trim(parts[1]);
        if (st != "0" && st != "1")
            fail(errc::bad_input, where + ": status must be 0 or 1, got '" + st + "'");
        rec.status = st == "1" ? 1 : 0;
        rec.group = trim(parts[2]);
        if (rec.group.empty()) fail(errc::bad_input, where + ": empty group label");
        records.push_back(std::move(rec));
    }
    if (!header_seen) fail(errc::bad_input, path + ": empty file");
    return records;
}

namespace {

WeightSet resolve_menu(const CliTestRequest& req, std::vector<std::string>& pruned) {
    std::vector<WeightFn> ws;
    for (const auto& [r, g] : req.rg) ws.push_back(make_rg(r, g));
    if (req.cross) ws.push_back(make_crossing());
    if (ws.empty()) fail(errc::bad_config, "no weight directions selected");
    const WeightSet requested = make_weight_set(std::move(ws));
    const WeightSet menu = select_independent_subset(requested);
    pruned.clear();
    std::size_t kept = 0;
    for (const WeightFn& w : requested.weights) {
        if (kept < menu.weights.size() && menu.weights[kept].tag == w.tag)
            ++kept;
        else
            pruned.push_back(w.tag);
    }
    return menu;
}

}  // namespace

CliReport cmd_test(const CliTestRequest& req) {
    if (req.n_perm < 1) fail(errc::bad_config, "n_perm must be at least 1");
    if (!(req.alpha > 0.0 && req.alpha < 1.0))
        fail(errc::bad_config, "alpha must lie strictly between 0 and 1");

    CliReport rep;
    rep.input = req.input;
    const WeightSet menu = resolve_menu(req, rep.pruned);
    if (!rep.pruned.empty()) {
        std::string msg = "warning: dropped linearly dependent directions:";
        for (const auto& t : rep.pruned) msg += " " + t;
        std::fprintf(stderr, "%s\n", msg.c_str());
    }
    for (const WeightFn& w : menu.weights) rep.directions.push_back(w.tag);

    const TwoSampleData data = ingest(read_survival_csv(req.input));
    rep.n = data.n();
    rep.n1 = data.n1;
    rep.n2 = data.n2;
    rep.label1 = data.label1;
    rep.label2 = data.label2;
    for (const Subject& s : data.subjects) rep.events += s.status;

    PermConfig pc;
    pc.n_perm = req.n_perm;
    pc.seed = req.seed;
    pc.keep_stats = false;
    const PermResult pr = permutation_test(data, menu, pc);
    const StatResult res = compute_sn(build_risk_table(data), menu);
    const TestOutcome oc = chi2_test(res, req.alpha);

    rep.alpha = req.alpha;
    rep.n_perm = pr.n_perm;
    rep.seed = req.seed;
    rep.s_n = res.s_n;
    rep.df = res.df_used;
    rep.p_chi2 = oc.p_chi2;
    rep.p_perm = pr.p_perm;
    rep.reject_chi2 = oc.reject;
    rep.reject_perm = pr.p_perm <= req.alpha;
    for (const DirectionDiag& d : res.per_direction)
        rep.per_direction.push_back({d.tag, d.t_n, d.sigma2, d.studentized_sq});
    return rep;
}

CliReport cmd_single(const CliTestRequest& req) {
    const std::size_t m = req.rg.size() + (req.cross ? 1 : 0);
    if (m != 1) fail(errc::bad_config, "single-direction test needs exactly one weight");
    return cmd_test(req);
}

std::string report_to_text(const CliReport& r) {
    std::string s;
    s += "multiple-direction logrank test\n";
    s += "input: " + r.input + "\n";
    s += "groups: " + r.label1 + " (n1=" + std::to_string(r.n1) + ") vs " + r.label2 +
         " (n2=" + std::to_string(r.n2) + "), " + std::to_string(r.events) + " events of " +
         std::to_string(r.n) + "\n";
    s += "directions:";
    for (const auto& t : r.directions) s += " " + t;
    s += "\n";
    if (!r.pruned.empty()) {
        s += "dropped as linearly dependent:";
        for (const auto& t : r.pruned) s += " " + t;
        s += "\n";
    }
    s += "S_n = " + fmt("%.6g", r.s_n) + ", df = " + std::to_string(r.df) + "\n";
    s += "p (chi2 approximation) = " + fmt("%.3g", r.p_chi2) + "  [" +
         (r.reject_chi2 ? "reject" : "no rejection") + " at alpha " + fmt("%g", r.alpha) + "]\n";
    s += "p (permutation, " + std::to_string(r.n_perm) + " draws, seed " +
         std::to_string(r.seed) + ") = " + fmt("%.3g", r.p_perm) + "  [" +
         (r.reject_perm ? "reject" : "no rejection") + " at alpha " + fmt("%g", r.alpha) + "]\n";
    s += "per direction (t, sigma2, t^2/sigma2):\n";
    for (const auto& d : r.per_direction)
        s += "  " + d.tag + ": " + fmt("%.6g", d.t_n) + ", " + fmt("%.6g", d.sigma2) + ", " +
             fmt("%.6g", d.studentized_sq) + "\n";
    return s;
}

std::string report_to_json_text(const CliReport& r) {
    json j;
    j["schema"] = r.schema;
    j["input"] = r.input;
    j["n"] = r.n;
    j["n1"] = r.n1;
    j["n2"] = r.n2;
    j["events"] = r.events;
    j["label1"] = r.label1;
    j["label2"] = r.label2;
    j["directions"] = r.directions;
    j["pruned"] = r.pruned;
    j["alpha"] = r.alpha;
    j["n_perm"] = r.n_perm;
    j["seed"] = r.seed;
    j["s_n"] = r.s_n;
    j["df"] = r.df;
    j["p_chi2"] = r.p_chi2;
    j["p_perm"] = r.p_perm;
    j["reject_chi2"] = r.reject_chi2;
    j["reject_perm"] = r.reject_perm;
    json dirs = json::array();
    for (const auto& d : r.per_direction)
        dirs.push_back({{"tag", d.tag},
                        {"t", d.t_n},
                        {"sigma2", d.sigma2},
                        {"studentized_sq", d.studentized_sq}});
    j["per_direction"] = dirs;
    return j.dump(2) + "\n";
}

CliReport report_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(errc::bad_input, std::string("cannot parse report JSON: ") + e.what());
    }
    CliReport r;
    try {
        r.schema = j.at("schema").get<std::string>();
        if (r.schema != CliReport{}.schema)
            fail(errc::bad_input, "unsupported report schema " + r.schema);
        r.input = j.at("input").get<std::string>();
        r.n = j.at("n").get<int>();
        r.n1 = j.at("n1").get<int>();
        r.n2 = j.at("n2").get<int>();
        r.events = j.at("events").get<int>();
        r.label1 = j.at("label1").get<std::string>();
        r.label2 = j.at("label2").get<std::string>();
        r.directions = j.at("directions").get<std::vector<std::string>>();
        r.pruned = j.at("pruned").get<std::vector<std::string>>();
        r.alpha = j.at("alpha").get<double>();
        r.n_perm = j.at("n_perm").get<long>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.s_n = j.at("s_n").get<double>();
        r.df = j.at("df").get<int>();
        r.p_chi2 = j.at("p_chi2").get<double>();
        r.p_perm = j.at("p_perm").get<double>();
        r.reject_chi2 = j.at("reject_chi2").get<bool>();
        r.reject_perm = j.at("reject_perm").get<bool>();
        for (const auto& d : j.at("per_direction")) {
            r.per_direction.push_back({d.at("tag").get<std::string>(), d.at("t").get<double>(),
                                       d.at("sigma2").get<double>(),
                                       d.at("studentized_sq").get<double>()});
        }
    } catch (const json::exception& e) {
        fail(errc::bad_input, std::string("report JSON missing fields: ") + e.what());
    }
    return r;
}

namespace {

// ---- simulate configs -----------------------------------------------------

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(errc::bad_input, "cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw UsageError(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError(path + ": config must be a JSON object");
    return j;
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw UsageError(where + ": unknown config key '" + key + "'");
    }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
    }
}

WeightFn parse_direction(const json& j, const std::string& key) {
    if (!j.contains(key)) throw UsageError("config is missing the '" + key + "' direction");
    const json& d = j.at(key);
    if (d.is_string()) {
        const std::string name = d.get<std::string>();
        if (name == "proportional") return make_rg(0, 0);
        if (name == "crossing" || name == "cross") return make_crossing();
        if (name == "central") return make_rg(1, 1);
        if (name == "early") return make_rg(0, 5);
        throw UsageError("unknown direction name '" + name +
                         "' (use proportional, crossing, central, early, or {\"rg\":[r,g]})");
    }
    if (d.is_object() && d.contains("rg")) {
        const auto rg = d.at("rg").get<std::vector<int>>();
        if (rg.size() != 2) throw UsageError("'" + key + "'.rg must be [r,g]");
        return make_rg(rg[0], rg[1]);
    }
    throw UsageError("'" + key + "' must be a direction name or {\"rg\":[r,g]}");
}

WeightSet parse_menu(const json& j, const std::string& where) {
    if (j.contains("menu")) {
        const json& m = j.at("menu");
        if (!m.is_object()) throw UsageError(where + ": 'menu' must be an object");
        check_keys(m, {"rg", "cross"}, where + ".menu");
        std::vector<WeightFn> ws;
        for (const auto& rg : get_or<std::vector<std::vector<int>>>(m, "rg", {})) {
            if (rg.size() != 2) throw UsageError(where + ": menu.rg entries must be [r,g]");
            ws.push_back(make_rg(rg[0], rg[1]));
        }
        if (get_or<bool>(m, "cross", true)) ws.push_back(make_crossing());
        if (ws.empty()) throw UsageError(where + ": menu is empty");
        return verified(make_weight_set(std::move(ws)));
    }
    const int dirs = get_or<int>(j, "directions", 2);
    if (dirs == 2) return menu_two_directions();
    if (dirs == 4) return menu_four_directions();
    throw UsageError(where + ": 'directions' must be 2 or 4 (or give an explicit 'menu')");
}

CensoringSpec parse_censoring(const std::string& name, double equal_p,
                              const std::vector<double>& unequal_p) {
    if (name == "none") return CensoringSpec::none();
    if (name == "equal") return CensoringSpec::equal(equal_p);
    if (name == "unequal") return CensoringSpec::unequal(unequal_p[0], unequal_p[1]);
    throw UsageError("unknown censoring design '" + name + "' (none, equal, unequal)");
}

std::vector<std::pair<int, int>> parse_sizes(const json& j,
                                             std::vector<std::pair<int, int>> fallback) {
    if (!j.contains("sizes")) return fallback;
    std::vector<std::pair<int, int>> sizes;
    for (const auto& s : get_or<std::vector<std::vector<int>>>(j, "sizes", {})) {
        if (s.size() != 2) throw UsageError("'sizes' entries must be [n1,n2]");
        sizes.emplace_back(s[0], s[1]);
    }
    if (sizes.empty()) throw UsageError("'sizes' must not be empty");
    return sizes;
}

std::string scenario_name(int n1, int n2, const std::string& cens) {
    return std::to_string(n1) + "x" + std::to_string(n2) + "_" + cens;
}

struct SimCommon {
    std::string config_path;
    std::string out;
    std::string format = "csv";  // csv | json
    bool paper_scale = false;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    long nperm_override = 0;
};

std::string rows_to_csv(const std::vector<SimReport>& reports) {
    std::string csv = "scenario_id,theta,method,rejection_rate,se,n_sim\n";
    for (const SimReport& rep : reports)
        for (const MethodRate& mr : rep.methods)
            csv += csv_escape(rep.scenario_id) + "," + fmt("%.10g", rep.theta) + "," +
                   csv_escape(mr.method) + "," + fmt("%.10g", mr.rate) + "," +
                   fmt("%.10g", mr.se) + "," + std::to_string(rep.n_sim) + "\n";
    return csv;
}

std::string rows_to_json(const std::vector<SimReport>& reports) {
    json rows = json::array();
    for (const SimReport& rep : reports)
        for (const MethodRate& mr : rep.methods)
            rows.push_back({{"scenario_id", rep.scenario_id},
                            {"theta", rep.theta},
                            {"method", mr.method},
                            {"rejection_rate", mr.rate},
                            {"se", mr.se},
                            {"n_sim", rep.n_sim}});
    return rows.dump(2) + "\n";
}

// Minimal SVG line plot of the power curves, one panel per scenario id.
std::string power_curves_svg(const std::vector<SimReport>& reports) {
    std::vector<std::string> ids;
    for (const auto& r : reports)
        if (std::find(ids.begin(), ids.end(), r.scenario_id) == ids.end())
            ids.push_back(r.scenario_id);

    const int w = 640, h = 400, ml = 56, mr = 16, mt = 36, mb = 44;
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
           "\" height=\"" + std::to_string(static_cast<int>(ids.size()) * h) + "\">\n";
    const char* dashes[4] = {"", "8,4", "2,3", "10,3,2,3"};
    for (std::size_t p = 0; p < ids.size(); ++p) {
        const int oy = static_cast<int>(p) * h;
        double tmax = 0.0;
        std::vector<const SimReport*> rows;
        for (const auto& r : reports)
            if (r.scenario_id == ids[p]) {
                rows.push_back(&r);
                tmax = std::max(tmax, r.theta);
            }
        if (tmax <= 0.0) tmax = 1.0;
        const double px0 = ml, px1 = w - mr, py0 = oy + h - mb, py1 = oy + mt;
        auto X = [&](double t) { return px0 + (px1 - px0) * (t / tmax); };
        auto Y = [&](double v) { return py0 + (py1 - py0) * v; };
        svg += "<text x=\"" + fmt("%g", px0) + "\" y=\"" + fmt("%g", oy + 20.0) +
               "\" font-family=\"sans-serif\" font-size=\"14\">" + ids[p] + "</text>\n";
        svg += "<line x1=\"" + fmt("%g", px0) + "\" y1=\"" + fmt("%g", py0) + "\" x2=\"" +
               fmt("%g", px1) + "\" y2=\"" + fmt("%g", py0) + "\" stroke=\"black\"/>\n";
        svg += "<line x1=\"" + fmt("%g", px0) + "\" y1=\"" + fmt("%g", py0) + "\" x2=\"" +
               fmt("%g", px0) + "\" y2=\"" + fmt("%g", py1) + "\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 4; ++k) {
            const double v = 0.25 * k;
            svg += "<text x=\"" + fmt("%g", px0 - 36) + "\" y=\"" + fmt("%g", Y(v) + 4) +
                   "\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.2f", v) +
                   "</text>\n";
            svg += "<line x1=\"" + fmt("%g", px0 - 4) + "\" y1=\"" + fmt("%g", Y(v)) +
                   "\" x2=\"" + fmt("%g", px0) + "\" y2=\"" + fmt("%g", Y(v)) +
                   "\" stroke=\"black\"/>\n";
        }
        for (int k = 0; k <= 4; ++k) {
            const double t = tmax * k / 4.0;
            svg += "<text x=\"" + fmt("%g", X(t) - 10) + "\" y=\"" + fmt("%g", py0 + 18) +
                   "\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.2f", t) +
                   "</text>\n";
        }
        const std::size_t n_methods = rows.empty() ? 0 : rows.front()->methods.size();
        for (std::size_t k = 0; k < n_methods; ++k) {
            std::string pts;
            for (const SimReport* r : rows)
                pts += fmt("%g", X(r->theta)) + "," + fmt("%g", Y(r->methods[k].rate)) + " ";
            svg += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"";
            if (*dashes[k % 4]) svg += " stroke-dasharray=\"" + std::string(dashes[k % 4]) + "\"";
            svg += " points=\"" + pts + "\"/>\n";
            svg += "<text x=\"" + fmt("%g", px0 + 10) + "\" y=\"" +
                   fmt("%g", py1 + 16.0 * static_cast<double>(k) + 4) +
                   "\" font-family=\"sans-serif\" font-size=\"11\">" +
                   rows.front()->methods[k].method +
                   (*dashes[k % 4] ? std::string(" (dash ") + dashes[k % 4] + ")" : " (solid)") +
                   "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

int run_simulate_type1(const SimCommon& cm) {
    const json cfg = load_config(cm.config_path);
    check_keys(cfg,
               {"kind", "sizes", "censoring", "equal_p", "unequal_p", "directions", "menu",
                "alpha", "n_sim", "n_perm", "seed"},
               cm.config_path);
    const auto sizes = parse_sizes(cfg, {{50, 50}, {30, 70}, {100, 100}, {150, 50}});
    const auto designs =
        get_or<std::vector<std::string>>(cfg, "censoring", {"none", "equal", "unequal"});
    const double equal_p = get_or<double>(cfg, "equal_p", 0.15);
    const auto unequal_p = get_or<std::vector<double>>(cfg, "unequal_p", {0.10, 0.20});
    if (unequal_p.size() != 2) throw UsageError("'unequal_p' must be [p1,p2]");
    const WeightSet menu = parse_menu(cfg, cm.config_path);

    SimScenario base;
    base.weight_menu = menu;
    base.alpha = get_or<double>(cfg, "alpha", 0.05);
    base.n_sim = get_or<int>(cfg, "n_sim", 2000);
    base.n_perm = get_or<int>(cfg, "n_perm", 500);
    base.seed = get_or<std::uint64_t>(cfg, "seed", 20260818u);
    if (cm.paper_scale) {
        base.n_sim = 10000;
        base.n_perm = 1000;
    }
    if (cm.seed_given) base.seed = cm.seed_override;
    if (cm.nperm_override > 0) base.n_perm = static_cast<int>(cm.nperm_override);

    std::vector<SimReport> reports;
    for (const auto& [n1, n2] : sizes) {
        for (const std::string& cens : designs) {
            SimScenario sc = base;
            sc.id = scenario_name(n1, n2, cens);
            sc.n1 = n1;
            sc.n2 = n2;
            sc.censoring = parse_censoring(cens, equal_p, unequal_p);
            sc.seed = derive_seed(base.seed, std::hash<std::string>{}(sc.id));
            reports.push_back(run_type1_study(sc));
        }
    }
    emit(cm.format == "json" ? rows_to_json(reports) : rows_to_csv(reports), cm.out);
    return 0;
}

int run_simulate_power(const SimCommon& cm) {
    const json cfg = load_config(cm.config_path);
    check_keys(cfg,
               {"kind", "sizes", "censoring", "equal_p", "unequal_p", "alternative",
                "mismatched", "theta_max", "grid_points", "alpha", "n_sim", "n_perm", "seed"},
               cm.config_path);
    const auto sizes = parse_sizes(cfg, {{50, 50}});
    const auto designs = get_or<std::vector<std::string>>(cfg, "censoring", {"equal"});
    const double equal_p = get_or<double>(cfg, "equal_p", 0.15);
    const auto unequal_p = get_or<std::vector<double>>(cfg, "unequal_p", {0.10, 0.20});
    if (unequal_p.size() != 2) throw UsageError("'unequal_p' must be [p1,p2]");
    const WeightFn alt_dir = parse_direction(cfg, "alternative");
    const WeightFn mis_dir = parse_direction(cfg, "mismatched");
    if (!cfg.contains("theta_max")) throw UsageError("config is missing 'theta_max'");
    const double theta_max = get_or<double>(cfg, "theta_max", 0.0);
    if (!(theta_max > 0.0)) throw UsageError("'theta_max' must be positive");
    const int grid = get_or<int>(cfg, "grid_points", 10);
    if (grid < 2) throw UsageError("'grid_points' must be at least 2");

    SimScenario base;
    base.alpha = get_or<double>(cfg, "alpha", 0.05);
    base.n_sim = get_or<int>(cfg, "n_sim", 500);
    base.n_perm = get_or<int>(cfg, "n_perm", 500);
    base.seed = get_or<std::uint64_t>(cfg, "seed", 20260818u);
    if (cm.paper_scale) {
        base.n_sim = 1000;
        base.n_perm = 1000;
    }
    if (cm.seed_given) base.seed = cm.seed_override;
    if (cm.nperm_override > 0) base.n_perm = static_cast<int>(cm.nperm_override);
    base.mismatched = mis_dir;

    std::vector<SimScenario> scenarios;
    for (const auto& [n1, n2] : sizes) {
        for (const std::string& cens : designs) {
            for (int k = 0; k < grid; ++k) {
                SimScenario sc = base;
                sc.id = scenario_name(n1, n2, cens);
                sc.n1 = n1;
                sc.n2 = n2;
                sc.censoring = parse_censoring(cens, equal_p, unequal_p);
                const double theta = theta_max * k / (grid - 1);
                sc.alternative = Alternative::hazard(theta, alt_dir);
                sc.seed = derive_seed(derive_seed(base.seed, std::hash<std::string>{}(sc.id)),
                                      static_cast<std::uint64_t>(k));
                scenarios.push_back(std::move(sc));
            }
        }
    }
    const std::vector<SimReport> reports = run_power_study(scenarios);
    emit(cm.format == "json" ? rows_to_json(reports) : rows_to_csv(reports), cm.out);
    if (!cm.out.empty()) {
        std::string svg_path = cm.out;
        const std::size_t dot = svg_path.find_last_of('.');
        svg_path = (dot == std::string::npos ? svg_path : svg_path.substr(0, dot)) + ".svg";
        emit(power_curves_svg(reports), svg_path);
    }
    return 0;
}

int run_simulate_asympt(const SimCommon& cm) {
    const json cfg = load_config(cm.config_path);
    check_keys(cfg, {"kind", "eta", "cens_rates", "direction", "directions", "menu", "alpha"},
               cm.config_path);
    AsymptoticPowerSpec spec;
    spec.eta = get_or<double>(cfg, "eta", 0.5);
    const auto rates = get_or<std::vector<double>>(cfg, "cens_rates", {0.0, 0.0});
    if (rates.size() != 2) throw UsageError("'cens_rates' must be [rate1,rate2]");
    spec.cens_rate1 = rates[0];
    spec.cens_rate2 = rates[1];
    spec.direction = parse_direction(cfg, "direction");
    spec.weight_menu = parse_menu(cfg, cm.config_path);
    spec.alpha = get_or<double>(cfg, "alpha", 0.05);

    const AsymptoticPower ap = asymptotic_power(spec);
    std::string outtext;
    if (cm.format == "json") {
        json j{{"eta", spec.eta},
               {"cens_rate1", spec.cens_rate1},
               {"cens_rate2", spec.cens_rate2},
               {"direction", spec.direction.tag},
               {"m", spec.weight_menu.m()},
               {"alpha", spec.alpha},
               {"lambda", ap.lambda},
               {"power", ap.power}};
        outtext = j.dump(2) + "\n";
    } else {
        outtext = "eta,cens_rate1,cens_rate2,direction,m,alpha,lambda,power\n";
        outtext += fmt("%.10g", spec.eta) + "," + fmt("%.10g", spec.cens_rate1) + "," +
                   fmt("%.10g", spec.cens_rate2) + "," + csv_escape(spec.direction.tag) + "," +
                   std::to_string(spec.weight_menu.m()) + "," + fmt("%.10g", spec.alpha) + "," +
                   fmt("%.10g", ap.lambda) + "," + fmt("%.10g", ap.power) + "\n";
    }
    emit(outtext, cm.out);
    return 0;
}

std::vector<std::pair<int, int>> parse_rg_specs(const std::vector<std::string>& specs,
                                                bool& cleared) {
    cleared = false;
    std::vector<std::pair<int, int>> rg;
    for (const std::string& s : specs) {
        if (s == "none") {
            if (specs.size() != 1) throw UsageError("--rg none cannot be combined with pairs");
            cleared = true;
            return rg;
        }
        const auto parts = split(s, ',');
        if (parts.size() != 2) throw UsageError("--rg expects r,g (e.g. --rg 1,5), got '" + s + "'");
        try {
            rg.emplace_back(std::stoi(trim(parts[0])), std::stoi(trim(parts[1])));
        } catch (const std::exception&) {
            throw UsageError("--rg expects integer r,g, got '" + s + "'");
        }
    }
    return rg;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"multiple-direction weighted logrank tests for two-sample survival data"};
    app.require_subcommand(1);

    CliTestRequest req;
    std::vector<std::string> rg_specs;
    CLI::App* test = app.add_subcommand("test", "two-sample test on a survival CSV");
    test->add_option("--input", req.input, "CSV file with header time,status,group")->required();
    test->add_option("--rg", rg_specs,
                     "direction w(r,g) as r,g (repeatable; 'none' clears the default w(0,0))");
    test->add_flag("--cross,!--no-cross", req.cross, "include the crossing direction (default on)");
    test->add_option("--nperm", req.n_perm, "permutation draws (default 10000)");
    test->add_option("--seed", req.seed, "RNG seed (default 1)");
    test->add_option("--alpha", req.alpha, "test level (default 0.05)");
    test->add_option("--format", req.format, "text | json")
        ->check(CLI::IsMember({"text", "json"}));
    test->add_option("--out", req.out, "write the report here instead of stdout");

    SimCommon cm;
    CLI::App* sim = app.add_subcommand("simulate", "simulation studies and asymptotics");
    sim->require_subcommand(1);
    std::vector<CLI::App*> subs;
    for (const char* name : {"type1", "power", "asympt"}) {
        CLI::App* s = sim->add_subcommand(
            name, std::string("see README for the ") + name + " config schema");
        s->add_option("--input", cm.config_path, "JSON config file")->required();
        s->add_option("--out", cm.out, "output file (default stdout)");
        s->add_option("--format", cm.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
        s->add_flag("--paper-scale", cm.paper_scale, "full-size replication runs");
        s->add_option("--seed", cm.seed_override, "override the config seed")
            ->each([&](const std::string&) { cm.seed_given = true; });
        s->add_option("--nperm", cm.nperm_override, "override the config n_perm");
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (test->parsed()) {
            bool cleared = false;
            auto rg = parse_rg_specs(rg_specs, cleared);
            req.rg = (rg.empty() && !cleared) ? std::vector<std::pair<int, int>>{{0, 0}} : rg;
            const CliReport rep = cmd_test(req);
            emit(req.format == "json" ? report_to_json_text(rep) : report_to_text(rep), req.out);
            return 0;
        }
        if (subs[0]->parsed()) return run_simulate_type1(cm);
        if (subs[1]->parsed()) return run_simulate_power(cm);
        if (subs[2]->parsed()) return run_simulate_asympt(cm);
        return 2;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.numeric() ? 4 : 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

}  // namespace mdir
