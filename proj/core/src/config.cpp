#include "fedward/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fedward/rng.hpp"

namespace fedward {

using nlohmann::json;

std::string to_string(DefenseKind kind) {
    switch (kind) {
        case DefenseKind::fedward: return "fedward";
        case DefenseKind::fedavg: return "fedavg";
        case DefenseKind::median: return "median";
        case DefenseKind::trimmed_mean: return "trimmed_mean";
        case DefenseKind::static_clip: return "static_clip";
        case DefenseKind::kmeans2: return "kmeans2";
    }
    return "unknown";
}

std::string to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::none: return "none";
        case AttackKind::data_poison: return "data_poison";
        case AttackKind::scale: return "scale";
        case AttackKind::data_poison_scale: return "data_poison_scale";
        case AttackKind::forged: return "forged";
    }
    return "unknown";
}

std::string to_string(ModelKind kind) {
    return kind == ModelKind::linear ? "linear" : "mlp";
}

DefenseKind defense_kind_from_string(const std::string& s) {
    if (s == "fedward") return DefenseKind::fedward;
    if (s == "fedavg") return DefenseKind::fedavg;
    if (s == "median") return DefenseKind::median;
    if (s == "trimmed_mean") return DefenseKind::trimmed_mean;
    if (s == "static_clip") return DefenseKind::static_clip;
    if (s == "kmeans2") return DefenseKind::kmeans2;
    throw std::invalid_argument("config: unknown defense kind '" + s + "'");
}

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "none") return AttackKind::none;
    if (s == "data_poison") return AttackKind::data_poison;
    if (s == "scale") return AttackKind::scale;
    if (s == "data_poison_scale") return AttackKind::data_poison_scale;
    if (s == "forged") return AttackKind::forged;
    throw std::invalid_argument("config: unknown attack kind '" + s + "'");
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "linear") return ModelKind::linear;
    if (s == "mlp") return ModelKind::mlp;
    throw std::invalid_argument("config: unknown model kind '" + s + "'");
}

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

template <typename T>
T get_required(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key))
        throw std::invalid_argument("config: missing key '" + key + "' in " + where);
    return obj.at(key).get<T>();
}

AttackSpec parse_attack(const json& obj) {
    require_keys(obj, "attack",
                 {"kind", "scale_factor", "boost_epochs", "angle_deg", "magnitude_ratio"});
    AttackSpec a;
    a.kind = attack_kind_from_string(get_required<std::string>(obj, "kind", "attack"));
    a.scale_factor = get_or<double>(obj, "scale_factor", 1.0);
    a.boost_epochs = get_or<int>(obj, "boost_epochs", 0);
    a.angle_deg = get_or<double>(obj, "angle_deg", 0.0);
    a.magnitude_ratio = get_or<double>(obj, "magnitude_ratio", 1.0);
    return a;
}

DefenseSpec parse_defense(const json& obj) {
    require_keys(obj, "defense", {"kind", "trim_k", "clip_bound"});
    DefenseSpec d;
    d.kind = defense_kind_from_string(get_required<std::string>(obj, "kind", "defense"));
    d.trim_k = get_or<std::size_t>(obj, "trim_k", 0);
    d.clip_bound = get_or<double>(obj, "clip_bound", 1.0);
    return d;
}

ModelSpec parse_model(const json& obj) {
    require_keys(obj, "model", {"kind", "input_dim", "hidden_dim", "classes"});
    ModelSpec m;
    m.kind = model_kind_from_string(get_required<std::string>(obj, "kind", "model"));
    m.input_dim = get_required<std::size_t>(obj, "input_dim", "model");
    m.hidden_dim = get_or<std::size_t>(obj, "hidden_dim", 0);
    m.classes = get_required<int>(obj, "classes", "model");
    return m;
}

TrainConfig parse_train(const json& obj) {
    require_keys(obj, "train", {"lr", "batch_size", "local_epochs"});
    TrainConfig t;
    t.lr = get_required<double>(obj, "lr", "train");
    t.batch_size = get_or<std::size_t>(obj, "batch_size", 32);
    t.local_epochs = get_or<std::size_t>(obj, "local_epochs", 1);
    return t;
}

DatasetSpec parse_dataset(const json& obj) {
    std::string kind = get_required<std::string>(obj, "kind", "dataset");
    if (kind == "synthetic") {
        require_keys(obj, "dataset",
                     {"kind", "classes", "per_class_train", "per_class_test", "rows", "cols",
                      "noise_sigma"});
        SyntheticSpec s;
        s.classes = get_required<int>(obj, "classes", "dataset");
        s.per_class_train = get_required<std::size_t>(obj, "per_class_train", "dataset");
        s.per_class_test = get_required<std::size_t>(obj, "per_class_test", "dataset");
        s.rows = get_required<std::size_t>(obj, "rows", "dataset");
        s.cols = get_required<std::size_t>(obj, "cols", "dataset");
        s.noise_sigma = get_or<double>(obj, "noise_sigma", 0.15);
        return s;
    }
    if (kind == "idx") {
        require_keys(obj, "dataset",
                     {"kind", "train_images", "train_labels", "test_images", "test_labels",
                      "rows", "cols"});
        IdxPaths p;
        p.train_images = get_required<std::string>(obj, "train_images", "dataset");
        p.train_labels = get_required<std::string>(obj, "train_labels", "dataset");
        p.test_images = get_required<std::string>(obj, "test_images", "dataset");
        p.test_labels = get_required<std::string>(obj, "test_labels", "dataset");
        p.rows = get_or<std::size_t>(obj, "rows", 28);
        p.cols = get_or<std::size_t>(obj, "cols", 28);
        return p;
    }
    throw std::invalid_argument("config: dataset kind must be 'synthetic' or 'idx'");
}

TriggerSpec parse_trigger(const json& obj) {
    require_keys(obj, "trigger",
                 {"patch_rows", "patch_cols", "patch_value", "anchors", "target_label"});
    TriggerSpec t;
    t.patch_rows = get_or<std::size_t>(obj, "patch_rows", 2);
    t.patch_cols = get_or<std::size_t>(obj, "patch_cols", 2);
    t.patch_value = get_or<double>(obj, "patch_value", 1.0);
    t.target_label = get_or<int>(obj, "target_label", 0);
    if (obj.contains("anchors")) {
        for (const auto& a : obj.at("anchors")) {
            if (!a.is_array() || a.size() != 2)
                throw std::invalid_argument("config: trigger anchors must be [row, col] pairs");
            t.anchors.emplace_back(a.at(0).get<std::size_t>(), a.at(1).get<std::size_t>());
        }
    }
    return t;
}

ExperimentConfig parse_config_object(const json& obj, const std::string& where) {
    require_keys(obj, where,
                 {"n_clients", "m_selected", "rounds", "malicious_fraction", "pdr", "nir",
                  "attack", "defense", "model", "train", "dataset", "trigger", "seed"});
    ExperimentConfig cfg;
    cfg.n_clients = get_required<std::size_t>(obj, "n_clients", where);
    cfg.m_selected = get_required<std::size_t>(obj, "m_selected", where);
    cfg.rounds = get_required<std::size_t>(obj, "rounds", where);
    cfg.malicious_fraction = get_or<double>(obj, "malicious_fraction", 0.0);
    cfg.pdr = get_or<double>(obj, "pdr", 0.0);
    cfg.nir = get_or<double>(obj, "nir", 0.0);
    cfg.seed = get_or<std::uint64_t>(obj, "seed", 0);
    cfg.attack = obj.contains("attack") ? parse_attack(obj.at("attack")) : AttackSpec{};
    cfg.attack.pdr = cfg.pdr;  // single source of truth for the poisoning rate
    cfg.defense = obj.contains("defense") ? parse_defense(obj.at("defense")) : DefenseSpec{};
    cfg.model = parse_model(get_required<json>(obj, "model", where));
    cfg.train = parse_train(get_required<json>(obj, "train", where));
    cfg.dataset = parse_dataset(get_required<json>(obj, "dataset", where));
    if (obj.contains("trigger")) cfg.trigger = parse_trigger(obj.at("trigger"));
    return cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    ExperimentConfig cfg = parse_config_object(parse_json(json_text), "config");
    validate(cfg);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(read_file(path));
}

SweepSpec parse_sweep_config(const std::string& json_text) {
    json obj = parse_json(json_text);
    require_keys(obj, "sweep config", {"base", "grid"});
    SweepSpec spec;
    spec.base = parse_config_object(get_required<json>(obj, "base", "sweep config"), "base");
    validate(spec.base);

    json grid = get_required<json>(obj, "grid", "sweep config");
    require_keys(grid, "grid", {"pdr", "nir", "defense"});
    spec.pdrs = get_required<std::vector<double>>(grid, "pdr", "grid");
    spec.nirs = get_required<std::vector<double>>(grid, "nir", "grid");
    for (const auto& name : get_required<std::vector<std::string>>(grid, "defense", "grid"))
        spec.defenses.push_back(defense_kind_from_string(name));
    if (spec.pdrs.empty() || spec.nirs.empty() || spec.defenses.empty())
        throw std::invalid_argument("config: grid axes must be non-empty");
    return spec;
}

SweepSpec load_sweep_config(const std::string& path) {
    return parse_sweep_config(read_file(path));
}

std::string canonical_config_json(const ExperimentConfig& cfg) {
    json obj;  // plain json keeps keys sorted
    obj["n_clients"] = cfg.n_clients;
    obj["m_selected"] = cfg.m_selected;
    obj["rounds"] = cfg.rounds;
    obj["malicious_fraction"] = cfg.malicious_fraction;
    obj["pdr"] = cfg.pdr;
    obj["nir"] = cfg.nir;
    obj["seed"] = cfg.seed;
    obj["attack"] = {{"kind", to_string(cfg.attack.kind)},
                     {"scale_factor", cfg.attack.scale_factor},
                     {"pdr", cfg.attack.pdr},
                     {"boost_epochs", cfg.attack.boost_epochs},
                     {"angle_deg", cfg.attack.angle_deg},
                     {"magnitude_ratio", cfg.attack.magnitude_ratio}};
    obj["defense"] = {{"kind", to_string(cfg.defense.kind)},
                      {"trim_k", cfg.defense.trim_k},
                      {"clip_bound", cfg.defense.clip_bound}};
    obj["model"] = {{"kind", to_string(cfg.model.kind)},
                    {"input_dim", cfg.model.input_dim},
                    {"hidden_dim", cfg.model.hidden_dim},
                    {"classes", cfg.model.classes}};
    obj["train"] = {{"lr", cfg.train.lr},
                    {"batch_size", cfg.train.batch_size},
                    {"local_epochs", cfg.train.local_epochs}};
    if (const auto* syn = std::get_if<SyntheticSpec>(&cfg.dataset)) {
        obj["dataset"] = {{"kind", "synthetic"},
                          {"classes", syn->classes},
                          {"per_class_train", syn->per_class_train},
                          {"per_class_test", syn->per_class_test},
                          {"rows", syn->rows},
                          {"cols", syn->cols},
                          {"noise_sigma", syn->noise_sigma}};
    } else {
        const auto& idx = std::get<IdxPaths>(cfg.dataset);
        obj["dataset"] = {{"kind", "idx"},
                          {"train_images", idx.train_images},
                          {"train_labels", idx.train_labels},
                          {"test_images", idx.test_images},
                          {"test_labels", idx.test_labels},
                          {"rows", idx.rows},
                          {"cols", idx.cols}};
    }
    if (cfg.trigger) {
        json anchors = json::array();
        for (const auto& [r, c] : cfg.trigger->anchors) anchors.push_back({r, c});
        obj["trigger"] = {{"patch_rows", cfg.trigger->patch_rows},
                          {"patch_cols", cfg.trigger->patch_cols},
                          {"patch_value", cfg.trigger->patch_value},
                          {"anchors", anchors},
                          {"target_label", cfg.trigger->target_label}};
    }
    return obj.dump();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::string canon = canonical_config_json(cfg);
    return fnv1a64(canon.data(), canon.size());
}

}  // namespace fedward
