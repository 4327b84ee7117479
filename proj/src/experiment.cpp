#include "beamtwin/experiment.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace beamtwin {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed) {
    if (!j.is_object()) throw InvalidConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw InvalidConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfigError("config key '" + key + "': " + e.what());
    }
}

json complex_to_json(const std::complex<double>& c) { return json::array({c.real(), c.imag()}); }

std::complex<double> complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw InvalidConfigError("complex values must be [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

json cvector_to_json(const Eigen::VectorXcd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v[i]));
    return out;
}

Eigen::VectorXcd cvector_from_json(const json& j) {
    Eigen::VectorXcd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(j[i]);
    return v;
}

json path_to_json(const PathComponent& p) {
    return {{"gain", complex_to_json(p.gain)}, {"azimuth", p.azimuth}, {"elevation", p.elevation}};
}

PathComponent path_from_json(const json& j) {
    check_keys(j, "path", {"gain", "azimuth", "elevation"});
    PathComponent p;
    p.gain = complex_from_json(j.at("gain"));
    p.azimuth = j.at("azimuth").get<double>();
    p.elevation = get_or(j, "elevation", kPi / 2.0);
    return p;
}

EndpointSpec endpoint_from_json(const json& j, const std::string& where) {
    EndpointSpec e;
    if (j.contains("paths")) {
        check_keys(j, where, {"paths"});
        for (const auto& pj : j.at("paths")) e.explicit_paths.push_back(path_from_json(pj));
        if (e.explicit_paths.empty())
            throw InvalidConfigError(where + ": explicit path list is empty");
        return e;
    }
    check_keys(j, where, {"num_paths", "azimuth_low", "azimuth_high", "gain_scale"});
    e.num_paths = get_or(j, "num_paths", 1);
    e.azimuth_low = get_or(j, "azimuth_low", -kPi / 2.0);
    e.azimuth_high = get_or(j, "azimuth_high", kPi / 2.0);
    e.gain_scale = get_or(j, "gain_scale", 1.0);
    return e;
}

json endpoint_to_json(const EndpointSpec& e) {
    if (!e.explicit_paths.empty()) {
        json paths = json::array();
        for (const auto& p : e.explicit_paths) paths.push_back(path_to_json(p));
        return {{"paths", paths}};
    }
    return {{"num_paths", e.num_paths},
            {"azimuth_low", e.azimuth_low},
            {"azimuth_high", e.azimuth_high},
            {"gain_scale", e.gain_scale}};
}

ScenarioSpec scenario_spec_from_json(const json& j) {
    check_keys(j, "scenario",
               {"num_antennas", "element_spacing", "phase_bits", "tx_power", "noise_power", "ue",
                "interferers", "impairment_gain_std", "impairment_phase_std"});
    ScenarioSpec s;
    s.num_antennas = get_or(j, "num_antennas", 8);
    s.element_spacing = get_or(j, "element_spacing", 0.5);
    s.phase_bits = get_or(j, "phase_bits", 3);
    s.tx_power = get_or(j, "tx_power", 1.0);
    s.noise_power = get_or(j, "noise_power", 0.01);
    if (j.contains("ue")) s.ue = endpoint_from_json(j.at("ue"), "scenario.ue");
    else s.ue.num_paths = 3;
    if (j.contains("interferers")) {
        const json& itf = j.at("interferers");
        if (itf.is_array()) {
            for (const auto& e : itf)
                s.interferers.push_back(endpoint_from_json(e, "scenario.interferers[]"));
        } else {
            check_keys(itf, "scenario.interferers",
                       {"count", "num_paths", "azimuth_low", "azimuth_high", "gain_scale"});
            const int count = get_or(itf, "count", 2);
            json shared = itf;
            shared.erase("count");
            EndpointSpec e = endpoint_from_json(shared, "scenario.interferers");
            s.interferers.assign(count, e);
        }
    } else {
        s.interferers.resize(2);
    }
    s.impairment_gain_std = get_or(j, "impairment_gain_std", 0.0);
    s.impairment_phase_std = get_or(j, "impairment_phase_std", 0.0);
    s.validate();
    return s;
}

json scenario_spec_to_json(const ScenarioSpec& s) {
    json itf = json::array();
    for (const auto& e : s.interferers) itf.push_back(endpoint_to_json(e));
    return {{"num_antennas", s.num_antennas},
            {"element_spacing", s.element_spacing},
            {"phase_bits", s.phase_bits},
            {"tx_power", s.tx_power},
            {"noise_power", s.noise_power},
            {"ue", endpoint_to_json(s.ue)},
            {"interferers", itf},
            {"impairment_gain_std", s.impairment_gain_std},
            {"impairment_phase_std", s.impairment_phase_std}};
}

TwinArchitecture architecture_from_string(const std::string& s) {
    if (s == "quadratic") return TwinArchitecture::kQuadratic;
    if (s == "dense") return TwinArchitecture::kDense;
    throw InvalidConfigError("twin architecture must be 'quadratic' or 'dense'");
}

std::string architecture_to_string(TwinArchitecture a) {
    return a == TwinArchitecture::kQuadratic ? "quadratic" : "dense";
}

TwinTrainConfig train_config_from_json(const json& j, TwinArchitecture arch) {
    TwinTrainConfig t = arch == TwinArchitecture::kQuadratic ? quadratic_train_defaults()
                                                             : dense_train_defaults();
    if (j.is_null()) return t;
    check_keys(j, "twin.train",
               {"batch_size", "epochs", "learning_rate", "milestones", "decay", "standardize"});
    t.batch_size = get_or(j, "batch_size", t.batch_size);
    t.epochs = get_or(j, "epochs", t.epochs);
    t.learning_rate = get_or(j, "learning_rate", t.learning_rate);
    t.milestones = get_or(j, "milestones", t.milestones);
    t.decay = get_or(j, "decay", t.decay);
    t.standardize = get_or(j, "standardize", t.standardize);
    return t;
}

json train_config_to_json(const TwinTrainConfig& t) {
    return {{"batch_size", t.batch_size},   {"epochs", t.epochs},
            {"learning_rate", t.learning_rate}, {"milestones", t.milestones},
            {"decay", t.decay},             {"standardize", t.standardize}};
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    check_keys(j, "config",
               {"scenario", "agent", "twin", "policy", "sweep", "collect_samples",
                "baseline_iterations", "pattern_points", "measurement_noise_db", "seeds",
                "output_dir"});
    ExperimentConfig c;
    if (j.contains("scenario")) c.scenario = scenario_spec_from_json(j.at("scenario"));
    else c.scenario = default_scenario_spec();

    c.agent.num_antennas = c.scenario.num_antennas;
    c.agent.phase_bits = c.scenario.phase_bits;
    if (j.contains("agent")) {
        const json& a = j.at("agent");
        check_keys(a, "agent",
                   {"discount", "soft_update_rate", "noise_scale", "noise_decay",
                    "buffer_capacity", "batch_size", "actor_lr", "critic_lr", "quantization"});
        c.agent.discount = get_or(a, "discount", c.agent.discount);
        c.agent.soft_update_rate = get_or(a, "soft_update_rate", c.agent.soft_update_rate);
        c.agent.noise_scale = get_or(a, "noise_scale", c.agent.noise_scale);
        c.agent.noise_decay = get_or(a, "noise_decay", c.agent.noise_decay);
        c.agent.buffer_capacity = get_or(a, "buffer_capacity", c.agent.buffer_capacity);
        c.agent.batch_size = get_or(a, "batch_size", c.agent.batch_size);
        c.agent.actor_lr = get_or(a, "actor_lr", c.agent.actor_lr);
        c.agent.critic_lr = get_or(a, "critic_lr", c.agent.critic_lr);
        const std::string q = get_or<std::string>(a, "quantization", "linear");
        if (q == "linear") c.agent.quantize_mode = QuantizeMode::kLinear;
        else if (q == "circular") c.agent.quantize_mode = QuantizeMode::kCircular;
        else throw InvalidConfigError("agent.quantization must be 'linear' or 'circular'");
    }

    c.twin.r_interference = static_cast<int>(c.scenario.interferers.size()) + 2;
    c.twin.hidden_width = 8 * c.scenario.num_antennas;
    json train_json;
    if (j.contains("twin")) {
        const json& t = j.at("twin");
        check_keys(t, "twin", {"architecture", "r_interference", "r_signal", "hidden_width",
                               "train"});
        c.twin.architecture =
            architecture_from_string(get_or<std::string>(t, "architecture", "quadratic"));
        c.twin.r_interference = get_or(t, "r_interference", c.twin.r_interference);
        c.twin.r_signal = get_or(t, "r_signal", c.twin.r_signal);
        c.twin.hidden_width = get_or(t, "hidden_width", c.twin.hidden_width);
        if (t.contains("train")) train_json = t.at("train");
    }
    c.twin.train = train_config_from_json(train_json, c.twin.architecture);

    if (j.contains("policy")) {
        const json& p = j.at("policy");
        check_keys(p, "policy",
                   {"initial_real_budget", "nmse_gate", "plateau_window", "reacquisition_size",
                    "max_rounds", "total_real_budget", "virtual_cap", "validation_fraction",
                    "eval_top_k"});
        c.policy.initial_real_budget = get_or(p, "initial_real_budget", c.policy.initial_real_budget);
        c.policy.nmse_gate = get_or(p, "nmse_gate", c.policy.nmse_gate);
        c.policy.plateau_window = get_or(p, "plateau_window", c.policy.plateau_window);
        c.policy.reacquisition_size = get_or(p, "reacquisition_size", c.policy.reacquisition_size);
        c.policy.max_rounds = get_or(p, "max_rounds", c.policy.max_rounds);
        c.policy.total_real_budget = get_or(p, "total_real_budget", c.policy.total_real_budget);
        c.policy.virtual_cap = get_or(p, "virtual_cap", c.policy.virtual_cap);
        c.policy.validation_fraction = get_or(p, "validation_fraction", c.policy.validation_fraction);
        c.policy.eval_top_k = get_or(p, "eval_top_k", c.policy.eval_top_k);
    }

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        check_keys(s, "sweep", {"sample_sizes", "architectures", "heldout_samples"});
        c.sweep.sample_sizes = get_or(s, "sample_sizes", c.sweep.sample_sizes);
        if (s.contains("architectures")) {
            c.sweep.architectures.clear();
            for (const auto& a : s.at("architectures"))
                c.sweep.architectures.push_back(architecture_from_string(a.get<std::string>()));
        }
        c.sweep.heldout_samples = get_or(s, "heldout_samples", c.sweep.heldout_samples);
    }

    c.collect_samples = get_or(j, "collect_samples", c.collect_samples);
    c.baseline_iterations = get_or(j, "baseline_iterations", c.baseline_iterations);
    c.pattern_points = get_or(j, "pattern_points", c.pattern_points);
    c.measurement_noise_db = get_or(j, "measurement_noise_db", c.measurement_noise_db);
    c.seeds = get_or(j, "seeds", c.seeds);
    c.output_dir = get_or(j, "output_dir", c.output_dir);

    try {
        c.agent.validate();
        c.policy.validate();
    } catch (const InvalidInputError& e) {
        throw InvalidConfigError(e.what());
    }
    if (c.collect_samples < 1 || c.baseline_iterations < 1 || c.pattern_points < 2)
        throw InvalidConfigError("config: counts must be positive");
    if (c.seeds.empty()) throw InvalidConfigError("config: seeds must not be empty");
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json agent = {{"discount", c.agent.discount},
                  {"soft_update_rate", c.agent.soft_update_rate},
                  {"noise_scale", c.agent.noise_scale},
                  {"noise_decay", c.agent.noise_decay},
                  {"buffer_capacity", c.agent.buffer_capacity},
                  {"batch_size", c.agent.batch_size},
                  {"actor_lr", c.agent.actor_lr},
                  {"critic_lr", c.agent.critic_lr},
                  {"quantization",
                   c.agent.quantize_mode == QuantizeMode::kLinear ? "linear" : "circular"}};
    json twin = {{"architecture", architecture_to_string(c.twin.architecture)},
                 {"r_interference", c.twin.r_interference},
                 {"r_signal", c.twin.r_signal},
                 {"hidden_width", c.twin.hidden_width},
                 {"train", train_config_to_json(c.twin.train)}};
    json policy = {{"initial_real_budget", c.policy.initial_real_budget},
                   {"nmse_gate", c.policy.nmse_gate},
                   {"plateau_window", c.policy.plateau_window},
                   {"reacquisition_size", c.policy.reacquisition_size},
                   {"max_rounds", c.policy.max_rounds},
                   {"total_real_budget", c.policy.total_real_budget},
                   {"virtual_cap", c.policy.virtual_cap},
                   {"validation_fraction", c.policy.validation_fraction},
                   {"eval_top_k", c.policy.eval_top_k}};
    json archs = json::array();
    for (auto a : c.sweep.architectures) archs.push_back(architecture_to_string(a));
    json sweep = {{"sample_sizes", c.sweep.sample_sizes},
                  {"architectures", archs},
                  {"heldout_samples", c.sweep.heldout_samples}};
    return {{"scenario", scenario_spec_to_json(c.scenario)},
            {"agent", agent},
            {"twin", twin},
            {"policy", policy},
            {"sweep", sweep},
            {"collect_samples", c.collect_samples},
            {"baseline_iterations", c.baseline_iterations},
            {"pattern_points", c.pattern_points},
            {"measurement_noise_db", c.measurement_noise_db},
            {"seeds", c.seeds},
            {"output_dir", c.output_dir}};
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

std::string config_hash_hex(const ExperimentConfig& config) {
    // nlohmann::json orders object keys, so dump() is canonical.
    const std::uint64_t h = fnv1a64(config_to_json(config).dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string csv_header_comment(const RunStamp& stamp) {
    std::ostringstream os;
    os << "# beamtwin_version=" << kArtifactVersion << " config_hash=" << stamp.config_hash
       << " seed=" << stamp.seed << "\n";
    return os.str();
}

json scenario_to_json(const Scenario& scenario, const RunStamp& stamp) {
    json geometry = {{"num_antennas", scenario.geometry.num_antennas},
                     {"element_spacing", scenario.geometry.element_spacing}};
    if (scenario.geometry.impairment)
        geometry["impairment"] = cvector_to_json(*scenario.geometry.impairment);
    json interferers = json::array();
    for (const auto& h : scenario.interferer_channels) interferers.push_back(cvector_to_json(h));
    json ue_paths = json::array();
    for (const auto& p : scenario.ue_paths) ue_paths.push_back(path_to_json(p));
    json itf_paths = json::array();
    for (const auto& paths : scenario.interferer_paths) {
        json group = json::array();
        for (const auto& p : paths) group.push_back(path_to_json(p));
        itf_paths.push_back(group);
    }
    return {{"artifact_version", kArtifactVersion},
            {"config_hash", stamp.config_hash},
            {"seed", scenario.seed},
            {"geometry", geometry},
            {"tx_power", scenario.tx_power},
            {"noise_power", scenario.noise_power},
            {"phase_bits", scenario.phase_bits},
            {"ue_channel", cvector_to_json(scenario.ue_channel)},
            {"interferer_channels", interferers},
            {"ue_paths", ue_paths},
            {"interferer_paths", itf_paths}};
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    const json& g = j.at("geometry");
    s.geometry.num_antennas = g.at("num_antennas").get<int>();
    s.geometry.element_spacing = g.at("element_spacing").get<double>();
    if (g.contains("impairment")) s.geometry.impairment = cvector_from_json(g.at("impairment"));
    s.tx_power = j.at("tx_power").get<double>();
    s.noise_power = j.at("noise_power").get<double>();
    s.phase_bits = j.at("phase_bits").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.ue_channel = cvector_from_json(j.at("ue_channel"));
    for (const auto& h : j.at("interferer_channels"))
        s.interferer_channels.push_back(cvector_from_json(h));
    if (j.contains("ue_paths"))
        for (const auto& p : j.at("ue_paths")) s.ue_paths.push_back(path_from_json(p));
    if (j.contains("interferer_paths")) {
        for (const auto& group : j.at("interferer_paths")) {
            std::vector<PathComponent> paths;
            for (const auto& p : group) paths.push_back(path_from_json(p));
            s.interferer_paths.push_back(std::move(paths));
        }
    }
    s.validate();
    return s;
}

void write_dataset_csv(const std::filesystem::path& path, const PowerDataset& dataset,
                       const RunStamp& stamp) {
    std::ostringstream os;
    os << csv_header_comment(stamp);
    const int m = dataset.size() > 0 ? static_cast<int>(dataset.samples.front().phases.size()) : 0;
    for (int c = 0; c < m; ++c) os << "phase_" << c << ",";
    os << "power\n";
    for (const auto& s : dataset.samples) {
        for (int c = 0; c < m; ++c) os << format_double(s.phases[c]) << ",";
        os << format_double(s.power) << "\n";
    }
    write_text_file(path, os.str());
}

PowerDataset read_dataset_csv(const std::filesystem::path& path, PredictorRole role) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open dataset file: " + path.string());
    PowerDataset d;
    d.role = role;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column names
            continue;
        }
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() < 2) throw InvalidInputError("dataset row too short: " + line);
        Eigen::VectorXd phases(vals.size() - 1);
        for (size_t i = 0; i + 1 < vals.size(); ++i) phases[static_cast<Eigen::Index>(i)] = vals[i];
        d.append(phases, vals.back());
    }
    return d;
}

json dataset_sidecar(const PowerDataset& dataset, const std::string& scenario_hash,
                     const RunStamp& stamp) {
    return {{"artifact_version", kArtifactVersion},
            {"config_hash", stamp.config_hash},
            {"seed", stamp.seed},
            {"role", dataset.role == PredictorRole::kSignal ? "signal" : "interference"},
            {"scenario_hash", scenario_hash},
            {"size", dataset.size()}};
}

void write_trace_csv(const std::filesystem::path& path, const LearningTrace& trace,
                     const RunStamp& stamp) {
    std::ostringstream os;
    os << csv_header_comment(stamp);
    os << "iteration,env,total_power,in_power,sinr,sinr_db,reward,cum_real\n";
    for (const auto& r : trace.rows) {
        os << r.iteration << "," << (r.virtual_env ? "virtual" : "real") << ","
           << format_double(r.total_power) << "," << format_double(r.in_power) << ","
           << format_double(r.sinr) << "," << format_double(to_db(r.sinr)) << ","
           << format_double(r.reward) << "," << r.cumulative_real << "\n";
    }
    write_text_file(path, os.str());
}

std::vector<double> read_trace_sinr_column(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open trace file: " + path.string());
    std::vector<double> sinr;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col == 4) sinr.push_back(std::stod(cell));
            ++col;
        }
    }
    return sinr;
}

json combiner_to_json(const Combiner& combiner) {
    json phases = json::array();
    for (int m = 0; m < combiner.size(); ++m) phases.push_back(combiner.phases[m]);
    return {{"phases", phases}};
}

Combiner combiner_from_json(const json& j) {
    const json& phases = j.at("phases");
    Eigen::VectorXd p(phases.size());
    for (size_t i = 0; i < phases.size(); ++i) p[static_cast<Eigen::Index>(i)] = phases[i].get<double>();
    return Combiner::from_phases(p);
}

json power_report_to_json(const PowerReport& report) {
    return {{"signal_power", report.signal_power},
            {"in_power", report.in_power},
            {"sinr", report.sinr},
            {"sinr_db", to_db(report.sinr)},
            {"rate", report.rate}};
}

json network_to_json(const DenseNetworkSpec& spec, const NetworkParameters& params) {
    json layers = json::array();
    for (size_t l = 0; l < params.weights.size(); ++l) {
        json w = json::array();
        for (Eigen::Index i = 0; i < params.weights[l].rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < params.weights[l].cols(); ++k)
                row.push_back(params.weights[l](i, k));
            w.push_back(row);
        }
        json b = json::array();
        for (Eigen::Index i = 0; i < params.biases[l].size(); ++i)
            b.push_back(params.biases[l][i]);
        layers.push_back({{"weights", w}, {"bias", b}});
    }
    json bn = json::array();
    for (const auto& s : params.batch_norm) {
        auto vec = [](const Eigen::VectorXd& v) {
            json a = json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
            return a;
        };
        bn.push_back({{"gamma", vec(s.gamma)},
                      {"beta", vec(s.beta)},
                      {"running_mean", vec(s.running_mean)},
                      {"running_var", vec(s.running_var)}});
    }
    return {{"layer_sizes", spec.layer_sizes},
            {"hidden_batch_norm", spec.hidden_batch_norm},
            {"output_activation",
             spec.output_activation == OutputActivation::kLinear ? "linear" : "scaled_tanh_pi"},
            {"layers", layers},
            {"batch_norm", bn}};
}

NetworkParameters network_from_json(const json& j, DenseNetworkSpec& spec_out) {
    spec_out.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    spec_out.hidden_batch_norm = j.at("hidden_batch_norm").get<bool>();
    spec_out.output_activation = j.at("output_activation").get<std::string>() == "linear"
                                     ? OutputActivation::kLinear
                                     : OutputActivation::kScaledTanhPi;
    spec_out.validate();
    NetworkParameters p;
    for (const auto& layer : j.at("layers")) {
        const auto& w = layer.at("weights");
        Eigen::MatrixXd weight(w.size(), w.at(0).size());
        for (size_t i = 0; i < w.size(); ++i)
            for (size_t k = 0; k < w.at(i).size(); ++k)
                weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                    w.at(i).at(k).get<double>();
        const auto& b = layer.at("bias");
        Eigen::VectorXd bias(b.size());
        for (size_t i = 0; i < b.size(); ++i) bias[static_cast<Eigen::Index>(i)] = b.at(i).get<double>();
        p.weights.push_back(std::move(weight));
        p.biases.push_back(std::move(bias));
    }
    for (const auto& bnj : j.at("batch_norm")) {
        auto vec = [](const json& a) {
            Eigen::VectorXd v(a.size());
            for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a.at(i).get<double>();
            return v;
        };
        BatchNormParams s;
        s.gamma = vec(bnj.at("gamma"));
        s.beta = vec(bnj.at("beta"));
        s.running_mean = vec(bnj.at("running_mean"));
        s.running_var = vec(bnj.at("running_var"));
        p.batch_norm.push_back(std::move(s));
    }
    return p;
}

json predictor_checkpoint(const PowerPredictor& predictor) {
    const std::string role = predictor.role() == PredictorRole::kSignal ? "signal" : "interference";
    if (const auto* quad = dynamic_cast<const QuadraticPredictor*>(&predictor)) {
        const Eigen::MatrixXcd& q = quad->parameter_matrix();
        json re = json::array(), im = json::array();
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            json rrow = json::array(), irow = json::array();
            for (Eigen::Index k = 0; k < q.cols(); ++k) {
                rrow.push_back(q(i, k).real());
                irow.push_back(q(i, k).imag());
            }
            re.push_back(rrow);
            im.push_back(irow);
        }
        return {{"architecture", "quadratic"},
                {"role", role},
                {"num_antennas", quad->num_antennas()},
                {"r_model", quad->r_model()},
                {"q_real", re},
                {"q_imag", im}};
    }
    const auto* dense = dynamic_cast<const DensePredictor*>(&predictor);
    if (!dense) throw InvalidInputError("predictor_checkpoint: unknown predictor type");
    json out = network_to_json(dense->spec(), dense->parameters());
    out["architecture"] = "dense";
    out["role"] = role;
    return out;
}

AggregateTrace aggregate_seeds(const std::vector<std::vector<double>>& series) {
    if (series.empty()) throw InvalidInputError("aggregate_seeds: no input traces");
    size_t longest = 0;
    for (const auto& s : series) {
        if (s.empty()) throw InvalidInputError("aggregate_seeds: empty trace");
        longest = std::max(longest, s.size());
    }
    AggregateTrace a;
    a.mean.resize(longest);
    a.stddev.resize(longest);
    a.padded.resize(longest);
    const double n = static_cast<double>(series.size());
    for (size_t i = 0; i < longest; ++i) {
        double sum = 0.0;
        int padded = 0;
        for (const auto& s : series) {
            if (i < s.size()) sum += s[i];
            else {
                sum += s.back();
                ++padded;
            }
        }
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& s : series) {
            const double v = i < s.size() ? s[i] : s.back();
            ss += (v - mean) * (v - mean);
        }
        a.mean[i] = mean;
        a.stddev[i] = std::sqrt(ss / n);
        a.padded[i] = padded;
    }
    return a;
}

void write_aggregate_csv(const std::filesystem::path& path, const AggregateTrace& aggregate,
                         const RunStamp& stamp) {
    std::ostringstream os;
    os << csv_header_comment(stamp);
    os << "iteration,mean_sinr,std_sinr,mean_sinr_db,padded\n";
    for (size_t i = 0; i < aggregate.mean.size(); ++i) {
        os << i << "," << format_double(aggregate.mean[i]) << ","
           << format_double(aggregate.stddev[i]) << "," << format_double(to_db(aggregate.mean[i]))
           << "," << aggregate.padded[i] << "\n";
    }
    write_text_file(path, os.str());
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write file: " + path.string());
    out << contents;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open file: " + path.string());
    json j;
    in >> j;
    return j;
}

}  // namespace beamtwin
