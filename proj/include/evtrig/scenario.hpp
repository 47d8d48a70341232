#pragma once

// Scenario documents (JSON). Numeric fields accept JSON numbers or decimal
// strings; strings are kept verbatim so a load/save cycle reproduces them.

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evtrig/channel.hpp"
#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"
#include "evtrig/plant.hpp"
#include "evtrig/sim.hpp"
#include "evtrig/triggers.hpp"

namespace evtrig {

using json = nlohmann::ordered_json;

/// A number plus the decimal text it was written as, if it came from a string.
struct Num {
    double value = 0;
    std::string text;

    Num() = default;
    Num(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
    operator double() const { return value; }  // NOLINT(google-explicit-constructor)
};

struct ScenarioFile {
    struct Plant {
        std::vector<std::vector<Num>> A, B, K, Q;
        Num a;
        std::optional<Num> beta, beta_fraction;
        std::optional<Num> Vd0, Vd0_factor;
    } plant;
    struct ChannelSlot {
        Num theta_start, theta_end, R;
        int pi_bar = 0;
    };
    std::vector<ChannelSlot> slots;
    struct Trigger {
        std::optional<Num> T, T_fraction_of_gamma1;
        Num sigma, sigma1;
        std::optional<Num> root_tol;
    } trigger;
    struct Sim {
        std::string mode = "blackout";
        std::vector<Num> x0, xhat0;
        std::optional<Num> de0, de0_factor;
        std::optional<Num> delay_factor;
        std::optional<std::string> packet_policy;
        Num horizon;
        std::optional<Num> scan_step, sample_step;
        std::optional<std::string> trace_path, transmissions_path, stats_path;
    } sim;
};

namespace detail {

inline void require_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw SchemaError(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw SchemaError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

inline Num parse_num(const json& j, const std::string& path) {
    if (j.is_number()) {
        Num n(j.get<double>());
        if (!std::isfinite(n.value)) throw SchemaError(path, "non-finite number");
        return n;
    }
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
            throw SchemaError(path, "'" + s + "' is not a decimal number");
        }
        Num n(v);
        n.text = s;
        return n;
    }
    throw SchemaError(path, "expected a number or decimal string");
}

inline json dump_num(const Num& n) {
    if (!n.text.empty()) return n.text;
    return n.value;
}

inline std::optional<Num> opt_num(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    return parse_num(obj.at(key), path + "." + key);
}

inline const json& need(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) throw SchemaError(path + "." + key, "missing required field");
    return obj.at(key);
}

inline std::vector<Num> parse_vec(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    std::vector<Num> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_num(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::vector<std::vector<Num>> parse_mat(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty array of rows");
    std::vector<std::vector<Num>> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_vec(j[i], path + "[" + std::to_string(i) + "]"));
        if (out.back().size() != out.front().size() || out.back().empty()) {
            throw SchemaError(path + "[" + std::to_string(i) + "]", "ragged or empty row");
        }
    }
    return out;
}

inline json dump_vec(const std::vector<Num>& v) {
    json a = json::array();
    for (const Num& n : v) a.push_back(dump_num(n));
    return a;
}

inline json dump_mat(const std::vector<std::vector<Num>>& m) {
    json a = json::array();
    for (const auto& r : m) a.push_back(dump_vec(r));
    return a;
}

inline Matrix to_matrix(const std::vector<std::vector<Num>>& m) {
    Matrix out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.front().size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j].value;
        }
    }
    return out;
}

inline Vector to_vector(const std::vector<Num>& v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].value;
    return out;
}

inline std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path, "expected a string");
    return j.get<std::string>();
}

}  // namespace detail

/// Slot records {theta_start, theta_end, R, pi_bar}.
[[nodiscard]] inline std::vector<ScenarioFile::ChannelSlot> parse_slots(const json& slots,
                                                                      const std::string& path) {
    using namespace detail;
    if (!slots.is_array() || slots.empty()) throw SchemaError(path, "expected a non-empty array");
    std::vector<ScenarioFile::ChannelSlot> out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const std::string sp = path + "[" + std::to_string(i) + "]";
        require_keys(slots[i], sp, {"theta_start", "theta_end", "R", "pi_bar"});
        ScenarioFile::ChannelSlot s;
        s.theta_start = parse_num(need(slots[i], "theta_start", sp), sp + ".theta_start");
        s.theta_end = parse_num(need(slots[i], "theta_end", sp), sp + ".theta_end");
        s.R = parse_num(need(slots[i], "R", sp), sp + ".R");
        const json& pb = need(slots[i], "pi_bar", sp);
        if (!pb.is_number_integer()) throw SchemaError(sp + ".pi_bar", "expected an integer");
        s.pi_bar = pb.get<int>();
        out.push_back(s);
    }
    return out;
}

[[nodiscard]] inline ScenarioFile parse_scenario(const json& doc) {
    using namespace detail;
    ScenarioFile f;
    require_keys(doc, "", {"plant", "channel", "trigger", "sim"});

    const json& p = need(doc, "plant", "");
    require_keys(p, "plant", {"A", "B", "K", "Q", "a", "beta", "beta_fraction", "Vd0", "Vd0_factor"});
    f.plant.A = parse_mat(need(p, "A", "plant"), "plant.A");
    f.plant.B = parse_mat(need(p, "B", "plant"), "plant.B");
    f.plant.K = parse_mat(need(p, "K", "plant"), "plant.K");
    f.plant.Q = parse_mat(need(p, "Q", "plant"), "plant.Q");
    f.plant.a = parse_num(need(p, "a", "plant"), "plant.a");
    f.plant.beta = opt_num(p, "beta", "plant");
    f.plant.beta_fraction = opt_num(p, "beta_fraction", "plant");
    if (f.plant.beta.has_value() == f.plant.beta_fraction.has_value()) {
        throw SchemaError("plant.beta", "give exactly one of beta, beta_fraction");
    }
    f.plant.Vd0 = opt_num(p, "Vd0", "plant");
    f.plant.Vd0_factor = opt_num(p, "Vd0_factor", "plant");
    if (f.plant.Vd0.has_value() == f.plant.Vd0_factor.has_value()) {
        throw SchemaError("plant.Vd0", "give exactly one of Vd0, Vd0_factor");
    }

    const json& c = need(doc, "channel", "");
    require_keys(c, "channel", {"slots"});
    f.slots = parse_slots(need(c, "slots", "channel"), "channel.slots");

    const json& t = need(doc, "trigger", "");
    require_keys(t, "trigger", {"T", "T_fraction_of_gamma1", "sigma", "sigma1", "root_tol"});
    f.trigger.T = opt_num(t, "T", "trigger");
    f.trigger.T_fraction_of_gamma1 = opt_num(t, "T_fraction_of_gamma1", "trigger");
    if (f.trigger.T && f.trigger.T_fraction_of_gamma1) {
        throw SchemaError("trigger.T", "give at most one of T, T_fraction_of_gamma1");
    }
    f.trigger.sigma = parse_num(need(t, "sigma", "trigger"), "trigger.sigma");
    f.trigger.sigma1 = parse_num(need(t, "sigma1", "trigger"), "trigger.sigma1");
    f.trigger.root_tol = opt_num(t, "root_tol", "trigger");

    const json& s = need(doc, "sim", "");
    require_keys(s, "sim", {"mode", "x0", "xhat0", "de0", "de0_factor", "delay_factor", "packet_policy",
                            "horizon", "scan_step", "sample_step", "output"});
    f.sim.mode = get_string(need(s, "mode", "sim"), "sim.mode");
    if (f.sim.mode != "blackout" && f.sim.mode != "no_blackout") {
        throw SchemaError("sim.mode", "expected 'blackout' or 'no_blackout'");
    }
    f.sim.x0 = parse_vec(need(s, "x0", "sim"), "sim.x0");
    f.sim.xhat0 = parse_vec(need(s, "xhat0", "sim"), "sim.xhat0");
    f.sim.de0 = opt_num(s, "de0", "sim");
    f.sim.de0_factor = opt_num(s, "de0_factor", "sim");
    if (f.sim.de0.has_value() == f.sim.de0_factor.has_value()) {
        throw SchemaError("sim.de0", "give exactly one of de0, de0_factor");
    }
    f.sim.delay_factor = opt_num(s, "delay_factor", "sim");
    if (s.contains("packet_policy")) {
        f.sim.packet_policy = get_string(s.at("packet_policy"), "sim.packet_policy");
        if (*f.sim.packet_policy != "max_bits" && *f.sim.packet_policy != "min_bits") {
            throw SchemaError("sim.packet_policy", "expected 'max_bits' or 'min_bits'");
        }
    }
    f.sim.horizon = parse_num(need(s, "horizon", "sim"), "sim.horizon");
    f.sim.scan_step = opt_num(s, "scan_step", "sim");
    f.sim.sample_step = opt_num(s, "sample_step", "sim");
    if (s.contains("output")) {
        const json& o = s.at("output");
        require_keys(o, "sim.output", {"trace", "transmissions", "stats"});
        if (o.contains("trace")) f.sim.trace_path = get_string(o.at("trace"), "sim.output.trace");
        if (o.contains("transmissions")) {
            f.sim.transmissions_path = get_string(o.at("transmissions"), "sim.output.transmissions");
        }
        if (o.contains("stats")) f.sim.stats_path = get_string(o.at("stats"), "sim.output.stats");
    }
    return f;
}

[[nodiscard]] inline json to_json(const ScenarioFile& f) {
    using namespace detail;
    json doc;
    json& p = doc["plant"];
    p["A"] = dump_mat(f.plant.A);
    p["B"] = dump_mat(f.plant.B);
    p["K"] = dump_mat(f.plant.K);
    p["Q"] = dump_mat(f.plant.Q);
    p["a"] = dump_num(f.plant.a);
    if (f.plant.beta) p["beta"] = dump_num(*f.plant.beta);
    if (f.plant.beta_fraction) p["beta_fraction"] = dump_num(*f.plant.beta_fraction);
    if (f.plant.Vd0) p["Vd0"] = dump_num(*f.plant.Vd0);
    if (f.plant.Vd0_factor) p["Vd0_factor"] = dump_num(*f.plant.Vd0_factor);

    json slots = json::array();
    for (const auto& s : f.slots) {
        json js;
        js["theta_start"] = dump_num(s.theta_start);
        js["theta_end"] = dump_num(s.theta_end);
        js["R"] = dump_num(s.R);
        js["pi_bar"] = s.pi_bar;
        slots.push_back(js);
    }
    doc["channel"]["slots"] = slots;

    json& t = doc["trigger"];
    if (f.trigger.T) t["T"] = dump_num(*f.trigger.T);
    if (f.trigger.T_fraction_of_gamma1) t["T_fraction_of_gamma1"] = dump_num(*f.trigger.T_fraction_of_gamma1);
    t["sigma"] = dump_num(f.trigger.sigma);
    t["sigma1"] = dump_num(f.trigger.sigma1);
    if (f.trigger.root_tol) t["root_tol"] = dump_num(*f.trigger.root_tol);

    json& s = doc["sim"];
    s["mode"] = f.sim.mode;
    s["x0"] = dump_vec(f.sim.x0);
    s["xhat0"] = dump_vec(f.sim.xhat0);
    if (f.sim.de0) s["de0"] = dump_num(*f.sim.de0);
    if (f.sim.de0_factor) s["de0_factor"] = dump_num(*f.sim.de0_factor);
    if (f.sim.delay_factor) s["delay_factor"] = dump_num(*f.sim.delay_factor);
    if (f.sim.packet_policy) s["packet_policy"] = *f.sim.packet_policy;
    s["horizon"] = dump_num(f.sim.horizon);
    if (f.sim.scan_step) s["scan_step"] = dump_num(*f.sim.scan_step);
    if (f.sim.sample_step) s["sample_step"] = dump_num(*f.sim.sample_step);
    if (f.sim.trace_path || f.sim.transmissions_path || f.sim.stats_path) {
        json& o = s["output"];
        if (f.sim.trace_path) o["trace"] = *f.sim.trace_path;
        if (f.sim.transmissions_path) o["transmissions"] = *f.sim.transmissions_path;
        if (f.sim.stats_path) o["stats"] = *f.sim.stats_path;
    }
    return doc;
}

[[nodiscard]] inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(origin, e.what());
    }
}

[[nodiscard]] inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

[[nodiscard]] inline ScenarioFile load_scenario_file(const std::string& path) {
    return parse_scenario(read_json_file(path));
}

[[nodiscard]] inline std::vector<Slot> to_slots(const std::vector<ScenarioFile::ChannelSlot>& slots) {
    std::vector<Slot> out;
    for (const auto& s : slots) out.push_back({s.theta_start, s.theta_end, s.R, s.pi_bar});
    return out;
}

/// Resolves every factor-style field and validates the parts.
[[nodiscard]] inline Scenario build_scenario(const ScenarioFile& f) {
    using namespace detail;
    Scenario sc;
    const Matrix A = to_matrix(f.plant.A);
    const Vector x0 = to_vector(f.sim.x0);
    const BetaSpec beta = f.plant.beta ? BetaSpec::absolute(*f.plant.beta)
                                       : BetaSpec::fraction(*f.plant.beta_fraction);
    // V_d0 may depend on P, so a provisional plant resolves it first.
    PlantModel probe = build_plant(A, to_matrix(f.plant.B), to_matrix(f.plant.K), to_matrix(f.plant.Q),
                                   beta, f.plant.a, 0.0);
    if (x0.size() != probe.n()) throw SchemaError("sim.x0", "dimension does not match plant.A");
    const double vd0 = f.plant.Vd0 ? f.plant.Vd0->value : f.plant.Vd0_factor->value * probe.lyapunov_value(x0);
    sc.plant = build_plant(A, to_matrix(f.plant.B), to_matrix(f.plant.K), to_matrix(f.plant.Q), beta,
                           f.plant.a, vd0);
    sc.channel = ChannelSchedule(to_slots(f.slots));

    TriggerConfig tc;
    tc.sigma = f.trigger.sigma;
    tc.sigma1 = f.trigger.sigma1;
    if (f.trigger.root_tol) tc.root_tol = *f.trigger.root_tol;
    if (f.trigger.T) {
        tc.T = *f.trigger.T;
    } else {
        const double frac = f.trigger.T_fraction_of_gamma1 ? f.trigger.T_fraction_of_gamma1->value : 0.1;
        tc.T = frac * Triggers::gamma11(sc.plant.constants(), tc.root_tol);
    }
    tc.validate();
    sc.trigger = tc;

    SimConfig& s = sc.sim;
    s.mode = f.sim.mode == "blackout" ? Mode::Blackout : Mode::NoBlackout;
    s.x0 = x0;
    s.x_hat0 = to_vector(f.sim.xhat0);
    if (s.x_hat0.size() != x0.size()) throw SchemaError("sim.xhat0", "dimension does not match sim.x0");
    s.d_e0 = f.sim.de0 ? f.sim.de0->value : f.sim.de0_factor->value * inf_norm(Vector(x0 - s.x_hat0));
    if (f.sim.delay_factor) s.delay_factor = *f.sim.delay_factor;
    s.packet_policy = f.sim.packet_policy.value_or("max_bits") == "min_bits" ? PacketPolicy::MinBits
                                                                            : PacketPolicy::MaxBits;
    s.horizon = f.sim.horizon;
    if (f.sim.scan_step) s.scan_step = *f.sim.scan_step;
    if (f.sim.sample_step) s.sample_step = *f.sim.sample_step;
    return sc;
}

// ---- trace output ------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace detail

inline void write_trace_csv(std::ostream& os, const SimTrace& tr) {
    using detail::fmt;
    os << "t";
    for (int i = 1; i <= tr.n; ++i) os << ",x" << i;
    for (int i = 1; i <= tr.n; ++i) os << ",xhat" << i;
    os << ",V,Vd,hpf,eps,hch,de,Phi,psi,Shat,L3\n";
    for (const Sample& s : tr.samples) {
        os << fmt(s.t);
        for (Eigen::Index i = 0; i < s.x.size(); ++i) os << ',' << fmt(s.x(i));
        for (Eigen::Index i = 0; i < s.x_hat.size(); ++i) os << ',' << fmt(s.x_hat(i));
        os << ',' << fmt(s.V) << ',' << fmt(s.Vd) << ',' << fmt(s.h_pf) << ',' << fmt(s.eps) << ','
           << fmt(s.h_ch) << ',' << fmt(s.d_e) << ',' << fmt(s.Phi) << ',' << fmt(s.psi) << ','
           << fmt(s.S_hat) << ',' << fmt(s.L3) << '\n';
    }
}

inline void write_transmissions_csv(std::ostream& os, const SimTrace& tr) {
    using detail::fmt;
    os << "k,tk,pk,rk,rtk\n";
    for (std::size_t k = 0; k < tr.transmissions.size(); ++k) {
        const auto& r = tr.transmissions[k].rec;
        os << k << ',' << fmt(r.t_k) << ',' << r.p_k << ',' << fmt(r.r_k) << ',' << fmt(r.r_tilde_k) << '\n';
    }
}

[[nodiscard]] inline json stats_json(const SimStats& st, const SimTrace& tr) {
    using detail::opt_json;
    json j;
    j["count"] = st.count;
    j["mean_interval"] = opt_json(st.mean_interval);
    j["min_interval"] = opt_json(st.min_interval);
    j["min_update_interval"] = opt_json(st.min_update_interval);
    j["bits_per_time"] = st.bits_per_time;
    j["max_h_pf"] = st.max_h_pf;
    j["min_de_margin"] = st.min_de_margin;
    j["bits_per_window"] = st.bits_per_window;
    j["scan_step"] = tr.scan_step;
    json checks = json::array();
    for (const auto& c : tr.blackout_checks) {
        json b;
        b["tau_l"] = c.tau_l;
        b["tau_u"] = c.tau_u;
        b["eps_at_start"] = c.eps_at_start;
        b["eps_r"] = c.eps_r;
        b["h_ch_at_end"] = opt_json(c.h_ch_at_end);
        checks.push_back(b);
    }
    j["blackouts"] = checks;
    j["violations"] = tr.violations;
    return j;
}

}  // namespace evtrig
