// evtrig: command-line front end for scenario simulation and channel analysis.
//
// Exit codes: 0 ok, 1 other failure, 2 schema/configuration error,
// 3 admissibility failure, 4 objective violation, 5 guarantee breach.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "evtrig/evtrig.hpp"

namespace fs = std::filesystem;
using namespace evtrig;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kAdmissibility = 3, kObjective = 4, kGuarantee = 5 };

struct SimFlags {
    std::string out_dir = ".";
    bool force = false;
    std::optional<double> delay_factor;
    std::optional<std::string> packet_policy;
    std::optional<double> scan_step;
    int jobs = 1;
};

std::mutex g_log_mu;

void log_line(const std::string& s) {
    std::lock_guard<std::mutex> lk(g_log_mu);
    std::cerr << s << '\n';
}

/// Maps library exceptions to exit codes.
template <class F>
int guarded(const std::string& label, F&& body) {
    try {
        return body();
    } catch (const SchemaError& e) {
        log_line(label + ": schema error: " + e.what());
        return kConfig;
    } catch (const ConfigError& e) {
        log_line(label + ": configuration error: " + e.what());
        return kConfig;
    } catch (const DimensionError& e) {
        log_line(label + ": configuration error: " + e.what());
        return kConfig;
    } catch (const ObjectiveViolation& e) {
        log_line(label + ": objective violated: " + e.what());
        return kObjective;
    } catch (const GuaranteeBreach& e) {
        log_line(label + ": guarantee breach: " + e.what());
        return kGuarantee;
    } catch (const std::exception& e) {
        log_line(label + ": error: " + e.what());
        return kOther;
    }
}

void write_file(const fs::path& p, const std::string& body) {
    fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    out << body;
}

fs::path output_path(const fs::path& out_dir, const std::optional<std::string>& configured,
                     const char* fallback) {
    return out_dir / configured.value_or(fallback);
}

int simulate_one(const fs::path& path, const fs::path& out_dir, const SimFlags& flags) {
    const std::string label = path.filename().string();
    return guarded(label, [&] {
        ScenarioFile file = load_scenario_file(path.string());
        if (flags.delay_factor) file.sim.delay_factor = Num(*flags.delay_factor);
        if (flags.packet_policy) file.sim.packet_policy = *flags.packet_policy;
        if (flags.scan_step) file.sim.scan_step = Num(*flags.scan_step);
        if (file.sim.packet_policy && *file.sim.packet_policy != "max_bits" &&
            *file.sim.packet_policy != "min_bits") {
            throw SchemaError("--packet-policy", "expected 'max_bits' or 'min_bits'");
        }
        const Scenario sc = build_scenario(file);
        Simulator sim(sc, SimOptions{flags.force});

        const AdmissibilityReport rep = sim.check_admissibility();
        for (const auto& item : rep.items) {
            if (!item.pass) log_line(label + ": admissibility FAIL: " + item.name + " (" + item.witness + ")");
        }
        if (!rep.ok() && !flags.force) return static_cast<int>(kAdmissibility);

        const SimTrace tr = sim.run();
        const SimStats st = summarize(tr, sc.channel);

        std::ostringstream trace, tx;
        write_trace_csv(trace, tr);
        write_transmissions_csv(tx, tr);
        json stats = stats_json(st, tr);
        stats["admissible"] = rep.ok();
        write_file(output_path(out_dir, file.sim.trace_path, "trace.csv"), trace.str());
        write_file(output_path(out_dir, file.sim.transmissions_path, "transmissions.csv"), tx.str());
        write_file(output_path(out_dir, file.sim.stats_path, "stats.json"), stats.dump(2) + "\n");

        for (const auto& v : tr.violations) log_line(label + ": violation: " + v);
        std::ostringstream msg;
        msg << label << ": " << st.count << " transmissions, " << st.bits_per_time
            << " bits per unit time, max h_pf " << st.max_h_pf;
        log_line(msg.str());
        return static_cast<int>(kOk);
    });
}

int cmd_simulate(const std::string& target, const SimFlags& flags) {
    const fs::path root(target);
    if (!fs::is_directory(root)) return simulate_one(root, flags.out_dir, flags);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<int> codes(files.size(), 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            codes[i] = simulate_one(files[i], fs::path(flags.out_dir) / files[i].stem(), flags);
        }
    };
    const int jobs = std::max(1, std::min<int>(flags.jobs, static_cast<int>(files.size())));
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    int rc = 0;
    for (int c : codes) rc = std::max(rc, c);
    return rc;
}

int cmd_constants(const std::string& path) {
    return guarded(path, [&] {
        const Scenario sc = build_scenario(load_scenario_file(path));
        const auto& pm = sc.plant;
        const auto& c = pm.constants();
        json j;
        json p = json::array();
        for (Eigen::Index r = 0; r < pm.P().rows(); ++r) {
            json row = json::array();
            for (Eigen::Index k = 0; k < pm.P().cols(); ++k) row.push_back(pm.P()(r, k));
            p.push_back(row);
        }
        j["P"] = p;
        j["lambda_min_P"] = c.lambda_min_p;
        j["lambda_max_P"] = c.lambda_max_p;
        j["lambda_min_Q"] = c.lambda_min_q;
        j["beta"] = pm.beta();
        j["a"] = pm.margin_factor();
        j["W"] = c.W;
        j["w"] = c.w;
        j["mu"] = c.mu;
        j["mu_bar"] = c.mu_bar;
        j["c"] = c.c;
        j["Vd0"] = pm.vd0();
        j["gamma1_11"] = Triggers::gamma11(c, sc.trigger.root_tol);
        j["T"] = sc.trigger.T;
        std::cout << j.dump(2) << '\n';
        return static_cast<int>(kOk);
    });
}

int cmd_triggers(const std::string& path, const std::string& out_dir, int p_max) {
    return guarded(path, [&] {
        const Scenario sc = build_scenario(load_scenario_file(path));
        const Triggers tr(sc.plant, sc.trigger);
        if (p_max <= 0) p_max = sc.channel.max_cap();
        std::ostringstream csv;
        csv.precision(17);
        csv << "p,T_star,T_M\n";
        for (int p = 1; p <= p_max; ++p) csv << p << ',' << tr.t_star(p) << ',' << tr.t_m(p) << '\n';
        std::cout.precision(17);
        std::cout << "# gamma1_11 = " << tr.gamma1_11() << ", T = " << sc.trigger.T << '\n' << csv.str();
        if (!out_dir.empty()) write_file(fs::path(out_dir) / "triggers.csv", csv.str());
        return static_cast<int>(kOk);
    });
}

/// Accepts either a full scenario (n from the plant) or {"n": .., "slots": [..]}.
ChannelSchedule load_channel(const std::string& path, int& n) {
    const json doc = read_json_file(path);
    if (doc.contains("plant")) {
        const ScenarioFile f = parse_scenario(doc);
        n = static_cast<int>(f.plant.A.size());
        return ChannelSchedule(to_slots(f.slots));
    }
    detail::require_keys(doc, "", {"n", "slots"});
    if (!doc.contains("n") || !doc.at("n").is_number_integer()) throw SchemaError("n", "expected an integer");
    n = doc.at("n").get<int>();
    if (n < 1) throw SchemaError("n", "must be positive");
    return ChannelSchedule(to_slots(parse_slots(detail::need(doc, "slots", ""), "slots")));
}

int cmd_capacity(const std::string& path, std::optional<std::size_t> j0, std::optional<std::size_t> jf) {
    return guarded(path, [&] {
        int n = 1;
        const ChannelSchedule ch = load_channel(path, n);
        const std::size_t a = j0.value_or(0);
        const std::size_t b = jf.value_or(ch.slot_count());
        const AllocationProblem prob = AllocationProblem::slice(ch, a, b, n);
        json j;
        j["n"] = n;
        j["j0"] = a;
        j["jf"] = b;
        j["tau1"] = prob.start();
        j["tau2"] = prob.end();
        const auto J = ch.compute_J(a, b);
        j["J"] = J ? json(*J) : json(nullptr);
        j["spill_free"] = spill_free(prob);
        auto plan_json = [](const CapacityPlan& pl) {
            json o;
            o["kind"] = to_string(pl.kind);
            o["phi"] = pl.phi;
            o["bits"] = pl.value_bits;
            if (!pl.lp_phi.empty()) o["lp_phi"] = pl.lp_phi;
            return o;
        };
        try {
            j["exact"] = plan_json(capacity_exact(prob));
        } catch (const ScaleGuardError& e) {
            j["exact"] = nullptr;
            j["exact_skipped"] = e.what();
        }
        j["sub_optimal"] = plan_json(capacity_plan(prob));
        std::cout << j.dump(2) << '\n';
        return static_cast<int>(kOk);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered control over time-varying rate-limited channels"};
    app.require_subcommand(1);

    SimFlags sf;
    std::string sim_path;
    auto* sim = app.add_subcommand("simulate", "Check admissibility, run, and write trace/transmissions/stats");
    sim->add_option("scenario", sim_path, "Scenario file or a directory of scenario files")->required();
    sim->add_option("--out-dir", sf.out_dir, "Output directory");
    sim->add_flag("--force", sf.force, "Run despite failed admissibility; record violations instead of stopping");
    sim->add_option("--delay-factor", sf.delay_factor, "Actual delay as a fraction of p/R")
        ->check(CLI::Range(0.0, 1.0));
    sim->add_option("--packet-policy", sf.packet_policy, "max_bits or min_bits")
        ->check(CLI::IsMember({"max_bits", "min_bits"}));
    sim->add_option("--scan-step", sf.scan_step, "Event scan step")->check(CLI::PositiveNumber);
    sim->add_option("--jobs", sf.jobs, "Concurrent scenarios for a directory")->check(CLI::PositiveNumber);

    std::string cap_path;
    std::optional<std::size_t> j0, jf;
    auto* cap = app.add_subcommand("capacity", "Exact and sub-optimal data capacity of a slot range");
    cap->add_option("file", cap_path, "Scenario file or {n, slots} document")->required();
    cap->add_option("--j0", j0, "First slot (inclusive)");
    cap->add_option("--jf", jf, "Last slot (exclusive)");

    std::string trig_path, trig_out;
    int p_max = 0;
    auto* trig = app.add_subcommand("triggers", "Tabulate Gamma1(1,1), T*(p) and T_M(p)");
    trig->add_option("scenario", trig_path)->required();
    trig->add_option("--out-dir", trig_out, "Also write triggers.csv here");
    trig->add_option("--p-max", p_max, "Largest p (default: largest channel cap)");

    std::string const_path;
    auto* cons = app.add_subcommand("constants", "Print P and the derived constants");
    cons->add_option("scenario", const_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kConfig;
    }

    if (*sim) return cmd_simulate(sim_path, sf);
    if (*cap) return cmd_capacity(cap_path, j0, jf);
    if (*trig) return cmd_triggers(trig_path, trig_out, p_max);
    if (*cons) return cmd_constants(const_path);
    return kOther;
}
