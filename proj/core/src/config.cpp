#include "dsl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dsl/error.hpp"

namespace dsl {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) fail(key, "expected true/false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) fail(key, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned() && it->get<long long>() < 0)
            fail(key, "must be non-negative");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) fail(key, "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) fail(key, "expected a string");
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      fail(key, e.what());
    }
  }

  template <class E>
  void get_enum(const char* key, E& out, std::initializer_list<std::pair<const char*, E>> names) {
    std::string s;
    bool present = j_.contains(key);
    get(key, s);
    if (!present) return;
    for (const auto& [name, value] : names) {
      if (s == name) {
        out = value;
        return;
      }
    }
    std::string allowed;
    for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : "|") + std::string(name);
    fail(key, "unknown value '" + s + "' (expected " + allowed + ")");
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    static const json empty = json::object();
    return ObjectReader(it == j_.end() ? empty : *it, qualified(key));
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(k, "unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError(qualified(key) + ": " + why);
  }

  std::string qualified(const std::string& key) const {
    if (path_.empty()) return key;
    if (key.empty()) return path_;
    return path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::dsl:
      return "dsl";
    case Algorithm::fl:
      return "fl";
    case Algorithm::pso:
      return "pso";
  }
  return "?";
}

namespace {

const char* to_string(ModelKind k) { return k == ModelKind::linear ? "linear" : "mlp"; }
const char* to_string(PartitionMode m) {
  switch (m) {
    case PartitionMode::dirichlet:
      return "dirichlet";
    case PartitionMode::shards:
      return "shards";
    case PartitionMode::iid:
      return "iid";
  }
  return "?";
}
const char* to_string(ChannelKind k) { return k == ChannelKind::ideal ? "ideal" : "rayleigh"; }
const char* to_string(PowerPolicy p) { return p == PowerPolicy::inversion ? "inversion" : "bev_max"; }
const char* to_string(VelocityRule r) {
  return r == VelocityRule::bi_displacement ? "bi" : "total";
}
const char* to_string(AttackKind k) {
  switch (k) {
    case AttackKind::none:
      return "none";
    case AttackKind::sign_flip:
      return "sign_flip";
    case AttackKind::gaussian_noise:
      return "gaussian_noise";
    case AttackKind::score_lying:
      return "score_lying";
  }
  return "?";
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.schedules.s_init = 1;
  cfg.schedules.s_final = 10;
  // Tuned on the synthetic task: weaker personal/social pulls and a larger
  // gradient step than the library defaults.
  cfg.schedules.alpha = 0.5;
  cfg.schedules.c1_max = 0.3;
  cfg.schedules.c2_max = 0.3;
  cfg.resolve();
  return cfg;
}

void ExperimentConfig::resolve() {
  schedules.rounds_total = rounds;
  data.partition.num_workers = num_workers;
}

void ExperimentConfig::validate() const {
  if (rounds < 1) throw ConfigError("rounds: must be >= 1");
  if (num_workers < 1) throw ConfigError("num_workers: must be >= 1");
  if (schedules.rounds_total != rounds || data.partition.num_workers != num_workers) {
    throw ConfigError("rounds/num_workers: nested specs not resolved");
  }
  model.validate();
  if (!(data.sep > 0.0)) throw ConfigError("data.sep: must be > 0");
  if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0))
    throw ConfigError("data.test_fraction: must be in (0, 1)");
  if (data.batch_size < 1) throw ConfigError("data.batch_size: must be >= 1");
  if (data.csv_path.empty() && data.n < static_cast<std::size_t>(model.classes))
    throw ConfigError("data.n: must be >= model.classes");
  data.partition.validate();
  schedules.validate(num_workers);
  if (!(optimizer.init_scale >= 0.0)) throw ConfigError("optimizer.init_scale: must be >= 0");
  channel.validate();
  censoring.validate();
  attacks.validate(num_workers);
  screening.validate();
  failures.validate();
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg = default_config();
  ObjectReader top(j, "");
  top.get_enum("algorithm", cfg.algorithm,
               {{"dsl", Algorithm::dsl}, {"fl", Algorithm::fl}, {"pso", Algorithm::pso}});
  top.get("rounds", cfg.rounds);
  top.get("num_workers", cfg.num_workers);
  top.get("seed", cfg.seed);
  top.get("output_dir", cfg.output_dir);

  {
    auto m = top.child("model");
    m.get_enum("kind", cfg.model.kind, {{"linear", ModelKind::linear}, {"mlp", ModelKind::mlp}});
    m.get("d_in", cfg.model.d_in);
    m.get("hidden", cfg.model.hidden);
    m.get("classes", cfg.model.classes);
    m.finish();
  }
  {
    auto d = top.child("data");
    auto& p = cfg.data.partition;
    d.get("csv_path", cfg.data.csv_path);
    d.get("n", cfg.data.n);
    d.get("sep", cfg.data.sep);
    d.get("test_fraction", cfg.data.test_fraction);
    d.get("share_global", cfg.data.share_global);
    d.get("standardize", cfg.data.standardize);
    d.get("batch_size", cfg.data.batch_size);
    d.get_enum("partition", p.mode,
               {{"dirichlet", PartitionMode::dirichlet},
                {"shards", PartitionMode::shards},
                {"iid", PartitionMode::iid}});
    d.get("dirichlet_alpha", p.dirichlet_alpha);
    d.get("shards_per_worker", p.shards_per_worker);
    d.get("global_fraction", p.global_fraction);
    d.get("global_split", p.global_split);
    d.finish();
  }
  {
    auto s = top.child("schedules");
    auto& h = cfg.schedules;
    s.get("lambda_init", h.lambda_init);
    s.get("lambda_final", h.lambda_final);
    s.get("c0_init", h.c0_init);
    s.get("c0_final", h.c0_final);
    s.get("c1_max", h.c1_max);
    s.get("c2_max", h.c2_max);
    s.get("alpha", h.alpha);
    s.get("mu", h.mu);
    s.get("s_init", h.s_init);
    s.get("s_final", h.s_final);
    s.finish();
  }
  {
    auto o = top.child("optimizer");
    o.get_enum("velocity_rule", cfg.optimizer.velocity_rule,
               {{"bi", VelocityRule::bi_displacement}, {"total", VelocityRule::total_displacement}});
    o.get_enum("coeff_draw", cfg.optimizer.coeff_draw,
               {{"per_coordinate", CoeffDraw::per_coordinate}, {"scalar", CoeffDraw::scalar}});
    o.get("init_scale", cfg.optimizer.init_scale);
    o.finish();
  }
  {
    auto c = top.child("channel");
    c.get_enum("kind", cfg.channel.kind,
               {{"ideal", ChannelKind::ideal}, {"rayleigh", ChannelKind::rayleigh}});
    c.get("noise_var", cfg.channel.noise_var);
    c.get("p_max", cfg.channel.p_max);
    c.get("h_min", cfg.channel.h_min);
    c.get_enum("policy", cfg.channel.policy,
               {{"inversion", PowerPolicy::inversion}, {"bev_max", PowerPolicy::bev_max}});
    c.finish();
  }
  {
    auto c = top.child("censoring");
    c.get("enabled", cfg.censoring.enabled);
    c.get("threshold_init", cfg.censoring.threshold_init);
    c.get("decay", cfg.censoring.decay);
    c.finish();
  }
  {
    auto a = top.child("attacks");
    a.get_enum("kind", cfg.attacks.kind,
               {{"none", AttackKind::none},
                {"sign_flip", AttackKind::sign_flip},
                {"gaussian_noise", AttackKind::gaussian_noise},
                {"score_lying", AttackKind::score_lying}});
    a.get("num_attackers", cfg.attacks.num_attackers);
    a.get("magnitude", cfg.attacks.magnitude);
    a.get("randomize_ids", cfg.attacks.randomize_ids);
    a.finish();
  }
  {
    auto s = top.child("screening");
    s.get("enabled", cfg.screening.enabled);
    s.get("max_retries", cfg.screening.max_retries);
    if (const json* tau = s.raw("tau")) {
      if (tau->is_string() && tau->get<std::string>() == "auto") {
        cfg.screening.auto_tau = true;
      } else if (tau->is_number()) {
        cfg.screening.auto_tau = false;
        cfg.screening.tau = tau->get<double>();
      } else {
        s.fail("tau", "expected a number or \"auto\"");
      }
    }
    s.finish();
  }
  {
    auto f = top.child("failures");
    f.get("link_drop_prob", cfg.failures.link_drop_prob);
    f.get("node_fail_prob", cfg.failures.node_fail_prob);
    f.finish();
  }
  top.finish();

  cfg.resolve();
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(j);
}

json load_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(load_config_json(path));
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["algorithm"] = to_string(cfg.algorithm);
  j["rounds"] = cfg.rounds;
  j["num_workers"] = cfg.num_workers;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["model"] = {{"kind", to_string(cfg.model.kind)},
                {"d_in", cfg.model.d_in},
                {"hidden", cfg.model.hidden},
                {"classes", cfg.model.classes}};
  const auto& p = cfg.data.partition;
  j["data"] = {{"csv_path", cfg.data.csv_path},
               {"n", cfg.data.n},
               {"sep", cfg.data.sep},
               {"test_fraction", cfg.data.test_fraction},
               {"share_global", cfg.data.share_global},
               {"standardize", cfg.data.standardize},
               {"batch_size", cfg.data.batch_size},
               {"partition", to_string(p.mode)},
               {"dirichlet_alpha", p.dirichlet_alpha},
               {"shards_per_worker", p.shards_per_worker},
               {"global_fraction", p.global_fraction},
               {"global_split", p.global_split}};
  const auto& h = cfg.schedules;
  j["schedules"] = {{"lambda_init", h.lambda_init}, {"lambda_final", h.lambda_final},
                    {"c0_init", h.c0_init},         {"c0_final", h.c0_final},
                    {"c1_max", h.c1_max},           {"c2_max", h.c2_max},
                    {"alpha", h.alpha},             {"mu", h.mu},
                    {"s_init", h.s_init},           {"s_final", h.s_final}};
  j["optimizer"] = {{"velocity_rule", to_string(cfg.optimizer.velocity_rule)},
                    {"coeff_draw", cfg.optimizer.coeff_draw == CoeffDraw::scalar ? "scalar"
                                                                                 : "per_coordinate"},
                    {"init_scale", cfg.optimizer.init_scale}};
  j["channel"] = {{"kind", to_string(cfg.channel.kind)},
                  {"noise_var", cfg.channel.noise_var},
                  {"p_max", cfg.channel.p_max},
                  {"h_min", cfg.channel.h_min},
                  {"policy", to_string(cfg.channel.policy)}};
  j["censoring"] = {{"enabled", cfg.censoring.enabled},
                    {"threshold_init", cfg.censoring.threshold_init},
                    {"decay", cfg.censoring.decay}};
  j["attacks"] = {{"kind", to_string(cfg.attacks.kind)},
                  {"num_attackers", cfg.attacks.num_attackers},
                  {"magnitude", cfg.attacks.magnitude},
                  {"randomize_ids", cfg.attacks.randomize_ids}};
  j["screening"] = {{"enabled", cfg.screening.enabled},
                    {"max_retries", cfg.screening.max_retries}};
  if (cfg.screening.auto_tau) {
    j["screening"]["tau"] = "auto";
  } else {
    j["screening"]["tau"] = cfg.screening.tau;
  }
  j["failures"] = {{"link_drop_prob", cfg.failures.link_drop_prob},
                   {"node_fail_prob", cfg.failures.node_fail_prob}};
  return j;
}

}  // namespace dsl
