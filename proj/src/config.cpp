#include "pwmstab/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pwmstab/report.hpp"

namespace pwmstab {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct RawEntry {
    std::string value;
    int line = 0;
};

double parse_double(const std::string& key, const RawEntry& e) {
    try {
        size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size())
            throw ValidationError("field " + key + ": trailing characters in '" +
                                  e.value + "' (line " + std::to_string(e.line) +
                                  ")");
        if (!std::isfinite(v))
            throw ValidationError("field " + key + ": non-finite value (line " +
                                  std::to_string(e.line) + ")");
        return v;
    } catch (const std::invalid_argument&) {
        throw ValidationError("field " + key + ": cannot parse number '" +
                              e.value + "' (line " + std::to_string(e.line) +
                              ")");
    } catch (const std::out_of_range&) {
        throw ValidationError("field " + key + ": number out of range (line " +
                              std::to_string(e.line) + ")");
    }
}

int parse_int(const std::string& key, const RawEntry& e) {
    const double v = parse_double(key, e);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ValidationError("field " + key + ": expected an integer (line " +
                              std::to_string(e.line) + ")");
    return i;
}

} // namespace

SwitchingRule RunConfig::make_rule() const {
    SwitchingRule rule;
    if (control.feedback == "i_L") {
        rule.feedback_F = default_feedback(2);
    } else {
        // Comma-separated explicit row vector.
        std::vector<double> entries;
        std::stringstream ss(control.feedback);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                entries.push_back(std::stod(trim(tok)));
            } catch (const std::exception&) {
                throw ValidationError(
                    "field control.feedback: cannot parse entry '" + tok + "'");
            }
        }
        if (entries.size() != 2)
            throw ValidationError(
                "field control.feedback: expected 'i_L' or two comma-separated "
                "numbers");
        rule.feedback_F = RowVec(2);
        rule.feedback_F << entries[0], entries[1];
    }
    rule.control_level = control.i_c;
    rule.ramp_slope_mc = control.m_c;
    return rule;
}

void RunConfig::validate() const {
    converter.validate();
    make_rule().validate(2);
    if (!(solver.orbit_tol > 0.0))
        throw ValidationError("field solver.orbit_tol must be positive");
    if (!(solver.bisect_tol > 0.0))
        throw ValidationError("field solver.bisect_tol must be positive");
    if (!(solver.event_tol_rel > 0.0))
        throw ValidationError("field solver.event_tol must be positive");
    if (sweep) {
        if (sweep->points < 2)
            throw ValidationError("field sweep.points must be at least 2");
        if (!(sweep->lo < sweep->hi))
            throw ValidationError("field sweep.lo must be below sweep.hi");
    }
    if (output.format != "csv" && output.format != "csv+svg")
        throw ValidationError("field output.format must be csv or csv+svg");
}

RunConfig parse_config(const std::string& text) {
    std::map<std::string, RawEntry> entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) +
                             ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError("line " + std::to_string(lineno) +
                             ": empty key or value");
        if (entries.count(key))
            throw ParseError("line " + std::to_string(lineno) +
                             ": duplicate key '" + key + "'");
        entries[key] = RawEntry{value, lineno};
    }

    static const std::set<std::string> known = {
        "converter.topology",      "converter.inductance_L",
        "converter.capacitance_C", "converter.load_R",
        "converter.source_vs",     "converter.period_T",
        "converter.esr_rC",        "converter.resistance_rL",
        "control.i_c",             "control.m_c",
        "control.feedback",        "solver.orbit_tol",
        "solver.bisect_tol",       "solver.event_tol",
        "sweep.param",             "sweep.lo",
        "sweep.hi",                "sweep.points",
        "output.dir",              "output.format",
    };
    for (const auto& [key, entry] : entries)
        if (!known.count(key))
            throw ParseError("line " + std::to_string(entry.line) +
                             ": unknown key '" + key + "'");

    auto take = [&](const char* key) -> std::optional<RawEntry> {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        return it->second;
    };
    auto require = [&](const char* key) -> RawEntry {
        auto e = take(key);
        if (!e)
            throw ValidationError(std::string("missing required field ") + key);
        return *e;
    };

    RunConfig cfg;
    {
        const RawEntry topo = require("converter.topology");
        if (topo.value == "buck")
            cfg.converter.topology = Topology::buck;
        else if (topo.value == "boost")
            cfg.converter.topology = Topology::boost;
        else
            throw ValidationError(
                "field converter.topology must be buck or boost (line " +
                std::to_string(topo.line) + ")");
    }
    cfg.converter.inductance_L =
        parse_double("converter.inductance_L", require("converter.inductance_L"));
    cfg.converter.capacitance_C = parse_double("converter.capacitance_C",
                                               require("converter.capacitance_C"));
    cfg.converter.load_R =
        parse_double("converter.load_R", require("converter.load_R"));
    cfg.converter.source_vs =
        parse_double("converter.source_vs", require("converter.source_vs"));
    cfg.converter.period_T =
        parse_double("converter.period_T", require("converter.period_T"));
    if (auto e = take("converter.esr_rC"))
        cfg.converter.esr_rC = parse_double("converter.esr_rC", *e);
    if (auto e = take("converter.resistance_rL"))
        cfg.converter.resistance_rL = parse_double("converter.resistance_rL", *e);

    cfg.control.i_c = parse_double("control.i_c", require("control.i_c"));
    if (auto e = take("control.m_c"))
        cfg.control.m_c = parse_double("control.m_c", *e);
    if (auto e = take("control.feedback")) cfg.control.feedback = e->value;

    if (auto e = take("solver.orbit_tol"))
        cfg.solver.orbit_tol = parse_double("solver.orbit_tol", *e);
    if (auto e = take("solver.bisect_tol"))
        cfg.solver.bisect_tol = parse_double("solver.bisect_tol", *e);
    if (auto e = take("solver.event_tol"))
        cfg.solver.event_tol_rel = parse_double("solver.event_tol", *e);

    const bool any_sweep = take("sweep.param") || take("sweep.lo") ||
                           take("sweep.hi") || take("sweep.points");
    if (any_sweep) {
        SweepConfig sw;
        const RawEntry p = require("sweep.param");
        sw.param = sweep_param_from_name(p.value);
        sw.lo = parse_double("sweep.lo", require("sweep.lo"));
        sw.hi = parse_double("sweep.hi", require("sweep.hi"));
        sw.points = parse_int("sweep.points", require("sweep.points"));
        cfg.sweep = sw;
    }

    if (auto e = take("output.dir")) cfg.output.dir = e->value;
    if (auto e = take("output.format")) cfg.output.format = e->value;

    cfg.validate();
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    auto kv = [&](const char* key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    auto kvd = [&](const char* key, double value) { kv(key, format_g12(value)); };

    kv("converter.topology",
       c.converter.topology == Topology::buck ? "buck" : "boost");
    kvd("converter.inductance_L", c.converter.inductance_L);
    kvd("converter.capacitance_C", c.converter.capacitance_C);
    kvd("converter.load_R", c.converter.load_R);
    kvd("converter.source_vs", c.converter.source_vs);
    kvd("converter.period_T", c.converter.period_T);
    kvd("converter.esr_rC", c.converter.esr_rC);
    kvd("converter.resistance_rL", c.converter.resistance_rL);
    kvd("control.i_c", c.control.i_c);
    kvd("control.m_c", c.control.m_c);
    kv("control.feedback", c.control.feedback);
    kvd("solver.orbit_tol", c.solver.orbit_tol);
    kvd("solver.bisect_tol", c.solver.bisect_tol);
    kvd("solver.event_tol", c.solver.event_tol_rel);
    if (c.sweep) {
        kv("sweep.param", sweep_param_name(c.sweep->param));
        kvd("sweep.lo", c.sweep->lo);
        kvd("sweep.hi", c.sweep->hi);
        kv("sweep.points", std::to_string(c.sweep->points));
    }
    kv("output.dir", c.output.dir);
    kv("output.format", c.output.format);
    return out.str();
}

} // namespace pwmstab
