#include "cle/cli_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cle/quadrature.hpp"

namespace cle::cli {
namespace {

using Json = nlohmann::ordered_json;

Json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double as_number(const Json& j, const char* key) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return HUGE_VAL;
        if (s == "-inf") return -HUGE_VAL;
        if (s == "nan") return std::nan("");
    }
    throw Error(std::string("JSON field '") + key + "' is not a number");
}

Json parse(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(std::string("malformed JSON: ") + e.what());
    }
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string to_json(const RunRecord& r) {
    Json j;
    j["command"] = r.command;
    j["tool_version"] = r.tool_version;
    j["params"] = Json::object();
    for (const auto& [k, v] : r.params) j["params"][k] = v;
    if (r.value) j["value"] = number(*r.value);
    if (!r.values.empty()) {
        j["values"] = Json::object();
        for (const auto& [k, v] : r.values) j["values"][k] = number(v);
    }
    if (r.std_error) j["stderr"] = number(*r.std_error);
    if (r.n) j["n"] = *r.n;
    if (r.seed) j["seed"] = *r.seed;
    if (!r.outputs.empty()) j["outputs"] = r.outputs;
    if (r.error_kind) j["error"] = {{"kind", *r.error_kind}, {"message", r.error_message.value_or("")}};
    j["runtime_ms"] = r.runtime_ms;
    return j.dump(2);
}

RunRecord run_record_from_json(const std::string& text) {
    const Json j = parse(text);
    RunRecord r;
    try {
        r.command = j.at("command").get<std::string>();
        r.tool_version = j.at("tool_version").get<std::string>();
        for (const auto& [k, v] : j.at("params").items()) r.params[k] = v.get<std::string>();
        if (j.contains("value")) r.value = as_number(j["value"], "value");
        if (j.contains("values"))
            for (const auto& [k, v] : j["values"].items()) r.values[k] = as_number(v, k.c_str());
        if (j.contains("stderr")) r.std_error = as_number(j["stderr"], "stderr");
        if (j.contains("n")) r.n = j["n"].get<std::uint64_t>();
        if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("outputs")) r.outputs = j["outputs"].get<std::map<std::string, std::string>>();
        if (j.contains("error")) {
            r.error_kind = j["error"].at("kind").get<std::string>();
            r.error_message = j["error"].at("message").get<std::string>();
        }
        r.runtime_ms = j.at("runtime_ms").get<std::int64_t>();
    } catch (const Json::exception& e) {
        throw Error(std::string("run record: ") + e.what());
    }
    return r;
}

bool SuiteReport::overall() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string to_json(const SuiteReport& r) {
    Json j;
    j["suite"] = r.suite;
    j["tool_version"] = r.tool_version;
    j["overall"] = r.overall();
    j["checks"] = Json::array();
    for (const auto& c : r.checks) {
        Json e;
        e["name"] = c.name;
        e["target"] = number(c.target);
        e["observed"] = number(c.observed);
        e["tolerance"] = number(c.tolerance);
        e["pass"] = c.pass;
        if (!c.note.empty()) e["note"] = c.note;
        j["checks"].push_back(std::move(e));
    }
    j["runtime_ms"] = r.runtime_ms;
    return j.dump(2);
}

SuiteReport suite_report_from_json(const std::string& text) {
    const Json j = parse(text);
    SuiteReport r;
    try {
        r.suite = j.at("suite").get<std::string>();
        r.tool_version = j.at("tool_version").get<std::string>();
        for (const auto& e : j.at("checks")) {
            Check c;
            c.name = e.at("name").get<std::string>();
            c.target = as_number(e.at("target"), "target");
            c.observed = as_number(e.at("observed"), "observed");
            c.tolerance = as_number(e.at("tolerance"), "tolerance");
            c.pass = e.at("pass").get<bool>();
            if (e.contains("note")) c.note = e["note"].get<std::string>();
            r.checks.push_back(std::move(c));
        }
        r.runtime_ms = j.at("runtime_ms").get<std::int64_t>();
        if (j.at("overall").get<bool>() != r.overall()) throw Error("suite report: overall flag disagrees with checks");
    } catch (const Json::exception& e) {
        throw Error(std::string("suite report: ") + e.what());
    }
    return r;
}

HistogramTable marked_jump_table(const levy::WeightedJumpHistogram& h, double a, double beta) {
    HistogramTable t;
    for (std::size_t i = 0; i + 1 < h.bin_edges.size(); ++i) {
        const double lo = h.bin_edges[i], hi = h.bin_edges[i + 1];
        t.bin_lo.push_back(lo);
        t.bin_hi.push_back(hi);
        t.mass.push_back(h.weighted_mass[i]);
        const auto q = quad::adapt_integrate([&](double b) { return levy::marked_jump_target_density(b, a, beta); },
                                             {lo, hi}, 1e-12);
        t.target.push_back(q.value);
    }
    return t;
}

void write_histogram_csv(const HistogramTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "bin_lo,bin_hi,mass,target\n";
    for (std::size_t i = 0; i < t.bin_lo.size(); ++i) {
        out << format_double(t.bin_lo[i]) << ',' << format_double(t.bin_hi[i]) << ',' << format_double(t.mass[i])
            << ',' << format_double(t.target[i]) << '\n';
    }
    if (!out) throw Error("write failed for " + path);
}

HistogramTable read_histogram_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "bin_lo,bin_hi,mass,target")
        throw Error(path + ": expected header bin_lo,bin_hi,mass,target");
    HistogramTable t;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        double v[4];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int k = 0; k < 4; ++k) {
            const auto res = std::from_chars(p, end, v[k]);
            if (res.ec != std::errc{}) throw Error(path + ":" + std::to_string(lineno) + ": bad number");
            p = res.ptr;
            if (k < 3) {
                if (p == end || *p != ',') throw Error(path + ":" + std::to_string(lineno) + ": expected 4 columns");
                ++p;
            }
        }
        t.bin_lo.push_back(v[0]);
        t.bin_hi.push_back(v[1]);
        t.mass.push_back(v[2]);
        t.target.push_back(v[3]);
    }
    return t;
}

ConfigMap parse_config(std::istream& in, const std::string& origin, const std::set<std::string>& allowed) {
    ConfigMap map;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) throw UsageError(where + ": missing key");
        if (value.empty()) throw UsageError(where + ": missing value for '" + key + "'");
        if (!allowed.empty() && !allowed.contains(key)) throw UsageError(where + ": unknown key '" + key + "'");
        if (const auto it = map.find(key); it != map.end()) {
            throw UsageError(origin + ": key '" + key + "' set on line " + std::to_string(it->second.line) +
                             " and again on line " + std::to_string(lineno));
        }
        map[key] = {value, lineno};
    }
    return map;
}

ConfigMap load_config(const std::string& path, const std::set<std::string>& allowed) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    return parse_config(in, path, allowed);
}

}  // namespace cle::cli
