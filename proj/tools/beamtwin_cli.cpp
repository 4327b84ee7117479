// Experiment driver: every pipeline stage as a subcommand over one config
// file, with per-seed outputs and a serial aggregation pass.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "beamtwin/experiment.hpp"

namespace fs = std::filesystem;
using namespace beamtwin;
using nlohmann::json;

namespace {

struct Context {
    ExperimentConfig config;
    std::string config_hash;
    fs::path out;
    std::vector<std::uint64_t> seeds;
    int threads = 1;
};

RunStamp stamp_for(const Context& ctx, std::uint64_t seed) { return {ctx.config_hash, seed}; }

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

Scenario make_scenario(const Context& ctx, std::uint64_t seed) {
    return generate_scenario(ctx.config.scenario, seed);
}

std::string scenario_hash(const Scenario& scenario, const Context& ctx, std::uint64_t seed) {
    const std::uint64_t h =
        fnv1a64(scenario_to_json(scenario, stamp_for(ctx, seed)).dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::optional<EstimationNoise> noise_for(const Context& ctx, std::uint64_t seed) {
    if (ctx.config.measurement_noise_db <= 0.0) return std::nullopt;
    return EstimationNoise{ctx.config.measurement_noise_db, mix_seed(seed, 0xe5)};
}

// Uniform random codebook beams measured on the real environment.
void collect_datasets(const Scenario& scenario, std::optional<EstimationNoise> noise, int n,
                      std::uint64_t rng_seed, PowerDataset& d_in, PowerDataset& d_s) {
    RealEnvironment env(scenario, noise);
    const PhaseCodebook cb = phase_set(scenario.phase_bits);
    std::mt19937_64 rng(mix_seed(rng_seed, 0xc011));
    std::uniform_int_distribution<int> pick(0, cb.size() - 1);
    d_in.role = PredictorRole::kInterference;
    d_s.role = PredictorRole::kSignal;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd phases(scenario.num_antennas());
        for (int m = 0; m < scenario.num_antennas(); ++m) phases[m] = cb.values[pick(rng)];
        const MeasurementReport r = env.measure(Combiner::from_phases(phases));
        d_in.append(phases, r.in_power);
        d_s.append(phases, derive_signal_power(r));
    }
}

void for_each_seed(const Context& ctx, const std::function<void(std::uint64_t)>& work) {
    if (ctx.threads <= 1 || ctx.seeds.size() <= 1) {
        for (std::uint64_t s : ctx.seeds) work(s);
        return;
    }
    std::mutex next_mutex;
    size_t next = 0;
    auto runner = [&] {
        while (true) {
            std::uint64_t seed;
            {
                std::lock_guard lock(next_mutex);
                if (next >= ctx.seeds.size()) return;
                seed = ctx.seeds[next++];
            }
            work(seed);
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min<int>(ctx.threads, static_cast<int>(ctx.seeds.size()));
    pool.reserve(k);
    for (int i = 0; i < k; ++i) pool.emplace_back(runner);
    for (auto& t : pool) t.join();
}

int cmd_gen_scenario(const Context& ctx) {
    for (std::uint64_t seed : ctx.seeds) {
        const Scenario sc = make_scenario(ctx, seed);
        write_json_file(ctx.out / ("scenario_" + seed_tag(seed) + ".json"),
                        scenario_to_json(sc, stamp_for(ctx, seed)));
    }
    return 0;
}

int cmd_collect(const Context& ctx) {
    for (std::uint64_t seed : ctx.seeds) {
        const Scenario sc = make_scenario(ctx, seed);
        PowerDataset d_in, d_s;
        collect_datasets(sc, noise_for(ctx, seed), ctx.config.collect_samples, seed, d_in, d_s);
        const RunStamp stamp = stamp_for(ctx, seed);
        const std::string sc_hash = scenario_hash(sc, ctx, seed);
        write_dataset_csv(ctx.out / ("d_in_" + seed_tag(seed) + ".csv"), d_in, stamp);
        write_dataset_csv(ctx.out / ("d_s_" + seed_tag(seed) + ".csv"), d_s, stamp);
        write_json_file(ctx.out / ("d_in_" + seed_tag(seed) + ".json"),
                        dataset_sidecar(d_in, sc_hash, stamp));
        write_json_file(ctx.out / ("d_s_" + seed_tag(seed) + ".json"),
                        dataset_sidecar(d_s, sc_hash, stamp));
    }
    return 0;
}

int cmd_train_twin(const Context& ctx, const std::string& din_override,
                   const std::string& ds_override) {
    for (std::uint64_t seed : ctx.seeds) {
        const fs::path din_path = din_override.empty()
                                      ? ctx.out / ("d_in_" + seed_tag(seed) + ".csv")
                                      : fs::path(din_override);
        const fs::path ds_path = ds_override.empty()
                                     ? ctx.out / ("d_s_" + seed_tag(seed) + ".csv")
                                     : fs::path(ds_override);
        PowerDataset d_in = read_dataset_csv(din_path, PredictorRole::kInterference);
        PowerDataset d_s = read_dataset_csv(ds_path, PredictorRole::kSignal);
        TwinConfig twin_cfg = ctx.config.twin;
        twin_cfg.seed = mix_seed(seed, 0x716e);
        DigitalTwin twin(twin_cfg, ctx.config.scenario.num_antennas);
        const TwinTrainResult in_result = twin.train_role(PredictorRole::kInterference, d_in);
        const TwinTrainResult s_result = twin.train_role(PredictorRole::kSignal, d_s);
        write_json_file(ctx.out / ("twin_in_" + seed_tag(seed) + ".json"),
                        predictor_checkpoint(twin.predictor(PredictorRole::kInterference)));
        write_json_file(ctx.out / ("twin_s_" + seed_tag(seed) + ".json"),
                        predictor_checkpoint(twin.predictor(PredictorRole::kSignal)));
        json nmse = {{"seed", seed},
                     {"train_nmse_interference",
                      evaluate_nmse(twin.predictor(PredictorRole::kInterference), d_in)},
                     {"train_nmse_signal", evaluate_nmse(twin.predictor(PredictorRole::kSignal), d_s)},
                     {"final_train_loss_interference", in_result.epoch_loss.back()},
                     {"final_train_loss_signal", s_result.epoch_loss.back()}};
        write_json_file(ctx.out / ("twin_nmse_" + seed_tag(seed) + ".json"), nmse);
    }
    return 0;
}

int cmd_twin_sweep(const Context& ctx) {
    std::mutex rows_mutex;
    std::vector<std::string> rows;
    for_each_seed(ctx, [&](std::uint64_t seed) {
        const Scenario sc = make_scenario(ctx, seed);
        const int n_max =
            *std::max_element(ctx.config.sweep.sample_sizes.begin(),
                              ctx.config.sweep.sample_sizes.end());
        PowerDataset master_in, master_s;
        collect_datasets(sc, noise_for(ctx, seed), n_max, seed, master_in, master_s);
        PowerDataset held_in, held_s;
        collect_datasets(sc, noise_for(ctx, seed), ctx.config.sweep.heldout_samples,
                         mix_seed(seed, 0x4e1d), held_in, held_s);
        for (int n : ctx.config.sweep.sample_sizes) {
            PowerDataset d_in{PredictorRole::kInterference,
                              {master_in.samples.begin(), master_in.samples.begin() + n}};
            PowerDataset d_s{PredictorRole::kSignal,
                             {master_s.samples.begin(), master_s.samples.begin() + n}};
            for (TwinArchitecture arch : ctx.config.sweep.architectures) {
                TwinConfig twin_cfg = ctx.config.twin;
                twin_cfg.architecture = arch;
                twin_cfg.train = arch == TwinArchitecture::kQuadratic ? quadratic_train_defaults()
                                                                      : dense_train_defaults();
                twin_cfg.seed = mix_seed(seed, 0x716e);
                DigitalTwin twin(twin_cfg, sc.num_antennas());
                twin.train_role(PredictorRole::kInterference, d_in);
                twin.train_role(PredictorRole::kSignal, d_s);
                const double nmse_in =
                    evaluate_nmse(twin.predictor(PredictorRole::kInterference), held_in);
                const double nmse_s = evaluate_nmse(twin.predictor(PredictorRole::kSignal), held_s);
                const std::string arch_name =
                    arch == TwinArchitecture::kQuadratic ? "quadratic" : "dense";
                std::lock_guard lock(rows_mutex);
                rows.push_back(arch_name + ",interference," + std::to_string(n) + "," +
                               std::to_string(seed) + "," + format_double(nmse_in));
                rows.push_back(arch_name + ",signal," + std::to_string(n) + "," +
                               std::to_string(seed) + "," + format_double(nmse_s));
            }
        }
    });
    std::sort(rows.begin(), rows.end());
    std::string csv = csv_header_comment({ctx.config_hash, ctx.seeds.front()});
    csv += "architecture,role,num_samples,seed,nmse\n";
    for (const auto& r : rows) csv += r + "\n";
    write_text_file(ctx.out / "nmse_table.csv", csv);
    return 0;
}

json run_summary(const RunResult& result, std::uint64_t seed) {
    json rounds = json::array();
    for (const auto& r : result.trace.rounds)
        rounds.push_back({{"round", r.round},
                          {"dataset_size", r.dataset_size},
                          {"nmse_interference", r.nmse_interference},
                          {"nmse_signal", r.nmse_signal},
                          {"gate_passed", r.gate_passed},
                          {"best_real_sinr", r.best_real_sinr}});
    return {{"seed", seed},
            {"best_sinr", result.best_sinr},
            {"best_sinr_db", to_db(result.best_sinr)},
            {"real_measurements", result.real_measurements},
            {"best_beam", combiner_to_json(result.best_combiner)},
            {"rounds", rounds}};
}

int cmd_train_real(const Context& ctx) {
    for_each_seed(ctx, [&](std::uint64_t seed) {
        const Scenario sc = make_scenario(ctx, seed);
        AgentConfig agent_cfg = ctx.config.agent;
        const RunResult result = run_baseline_real(sc, agent_cfg, ctx.config.baseline_iterations, seed);
        const RunStamp stamp = stamp_for(ctx, seed);
        write_trace_csv(ctx.out / ("trace_real_" + seed_tag(seed) + ".csv"), result.trace, stamp);
        write_json_file(ctx.out / ("summary_real_" + seed_tag(seed) + ".json"),
                        run_summary(result, seed));
    });
    std::vector<std::vector<double>> series;
    for (std::uint64_t seed : ctx.seeds)
        series.push_back(
            read_trace_sinr_column(ctx.out / ("trace_real_" + seed_tag(seed) + ".csv")));
    write_aggregate_csv(ctx.out / "aggregate_real.csv", aggregate_seeds(series),
                        {ctx.config_hash, ctx.seeds.front()});
    return 0;
}

int cmd_train_assisted(const Context& ctx) {
    for_each_seed(ctx, [&](std::uint64_t seed) {
        const Scenario sc = make_scenario(ctx, seed);
        const RunResult result =
            run_assisted(sc, ctx.config.agent, ctx.config.twin, ctx.config.policy, seed);
        const RunStamp stamp = stamp_for(ctx, seed);
        write_trace_csv(ctx.out / ("trace_assisted_" + seed_tag(seed) + ".csv"), result.trace,
                        stamp);
        write_json_file(ctx.out / ("summary_assisted_" + seed_tag(seed) + ".json"),
                        run_summary(result, seed));
    });
    std::vector<std::vector<double>> series;
    for (std::uint64_t seed : ctx.seeds)
        series.push_back(
            read_trace_sinr_column(ctx.out / ("trace_assisted_" + seed_tag(seed) + ".csv")));
    write_aggregate_csv(ctx.out / "aggregate_assisted.csv", aggregate_seeds(series),
                        {ctx.config_hash, ctx.seeds.front()});
    return 0;
}

int cmd_evaluate(const Context& ctx, const std::string& beam_path) {
    const Combiner beam = combiner_from_json(read_json_file(beam_path).contains("best_beam")
                                                 ? read_json_file(beam_path).at("best_beam")
                                                 : read_json_file(beam_path));
    for (std::uint64_t seed : ctx.seeds) {
        const Scenario sc = make_scenario(ctx, seed);
        const PowerReport report = compute_powers(beam, sc);
        json out = power_report_to_json(report);
        out["seed"] = seed;
        write_json_file(ctx.out / ("evaluate_" + seed_tag(seed) + ".json"), out);
        std::cout << out.dump(2) << "\n";
    }
    return 0;
}

int cmd_oracle(const Context& ctx) {
    for (std::uint64_t seed : ctx.seeds) {
        const Scenario sc = make_scenario(ctx, seed);
        const ExhaustiveResult best = exhaustive_search(sc);
        const Combiner blind = interference_blind_beam(sc);
        const PowerReport blind_report = compute_powers(blind, sc);
        json out = {{"seed", seed},
                    {"best_beam", combiner_to_json(best.combiner)},
                    {"report", power_report_to_json(best.report)},
                    {"sinr", best.report.sinr},
                    {"sinr_db", to_db(best.report.sinr)},
                    {"num_enumerated", best.num_enumerated},
                    {"blind_beam", combiner_to_json(blind)},
                    {"blind_report", power_report_to_json(blind_report)}};
        write_json_file(ctx.out / ("oracle_" + seed_tag(seed) + ".json"), out);
        std::cout << "oracle " << seed_tag(seed) << ": sinr_db=" << to_db(best.report.sinr)
                  << " (blind " << to_db(blind_report.sinr) << ")\n";
    }
    return 0;
}

int cmd_pattern(const Context& ctx, const std::string& beam_path) {
    const json j = read_json_file(beam_path);
    const Combiner beam = combiner_from_json(j.contains("best_beam") ? j.at("best_beam") : j);
    for (std::uint64_t seed : ctx.seeds) {
        const Scenario sc = make_scenario(ctx, seed);
        std::vector<double> grid(ctx.config.pattern_points);
        for (int i = 0; i < ctx.config.pattern_points; ++i)
            grid[i] = -kPi / 2.0 + kPi * i / (ctx.config.pattern_points - 1);
        const std::vector<double> gains = beam_gain_pattern(beam, sc.geometry, grid);
        std::string csv = csv_header_comment(stamp_for(ctx, seed));
        csv += "azimuth_deg,gain_db\n";
        for (size_t i = 0; i < grid.size(); ++i)
            csv += format_double(grid[i] * 180.0 / kPi) + "," + format_double(to_db(gains[i])) +
                   "\n";
        write_text_file(ctx.out / ("pattern_" + seed_tag(seed) + ".csv"), csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"digital-twin-assisted interference-aware beam learning"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string beam_path;
    std::string din_override, ds_override;
    std::int64_t seed_override = -1;
    int threads = 1;

    app.add_option("--config", config_path, "experiment config file (JSON)");
    app.add_option("--seed", seed_override, "run only this seed");
    app.add_option("--out", out_override, "output directory (overrides config and env)");
    app.add_option("--threads", threads, "parallel seeds")->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen-scenario", "write scenario JSON per seed");
    auto* collect = app.add_subcommand("collect", "measure power datasets with random beams");
    auto* train_twin_cmd = app.add_subcommand("train-twin", "train twin predictors on datasets");
    train_twin_cmd->add_option("--din", din_override, "interference dataset CSV");
    train_twin_cmd->add_option("--ds", ds_override, "signal dataset CSV");
    auto* sweep = app.add_subcommand("twin-sweep", "NMSE vs sample count table");
    auto* train_real = app.add_subcommand("train-real", "RL against the real environment");
    auto* train_assisted = app.add_subcommand("train-assisted", "twin-assisted RL");
    auto* evaluate = app.add_subcommand("evaluate", "exact powers for a stored beam");
    evaluate->add_option("--beam", beam_path, "beam JSON (phases or run summary)")->required();
    auto* oracle = app.add_subcommand("oracle", "exhaustive global-optimum search");
    auto* pattern = app.add_subcommand("pattern", "gain pattern CSV for a stored beam");
    pattern->add_option("--beam", beam_path, "beam JSON (phases or run summary)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        Context ctx;
        ctx.config = config_path.empty() ? parse_config(nlohmann::json::object())
                                         : load_config_file(config_path);
        ctx.config_hash = config_hash_hex(ctx.config);
        ctx.threads = threads;
        ctx.seeds = ctx.config.seeds;
        if (seed_override >= 0) ctx.seeds = {static_cast<std::uint64_t>(seed_override)};

        const char* env_out = std::getenv("BEAMTWIN_OUT");
        ctx.out = !out_override.empty() ? fs::path(out_override)
                  : env_out             ? fs::path(env_out)
                                        : fs::path(ctx.config.output_dir);
        fs::create_directories(ctx.out);

        if (gen->parsed()) return cmd_gen_scenario(ctx);
        if (collect->parsed()) return cmd_collect(ctx);
        if (train_twin_cmd->parsed()) return cmd_train_twin(ctx, din_override, ds_override);
        if (sweep->parsed()) return cmd_twin_sweep(ctx);
        if (train_real->parsed()) return cmd_train_real(ctx);
        if (train_assisted->parsed()) return cmd_train_assisted(ctx);
        if (evaluate->parsed()) return cmd_evaluate(ctx, beam_path);
        if (oracle->parsed()) return cmd_oracle(ctx);
        if (pattern->parsed()) return cmd_pattern(ctx, beam_path);
        return 1;
    } catch (const InvalidConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
