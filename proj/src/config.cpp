#include "fedcyc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fedcyc/csv.hpp"
#include "fedcyc/errors.hpp"

namespace fedcyc {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& reason) {
  throw ConfigError("config key '" + key + "': " + reason);
}

double as_real(const std::string& key, const std::string& v) {
  try {
    const double d = parse_double(v);
    if (!std::isfinite(d)) fail(key, "value must be finite");
    return d;
  } catch (const std::invalid_argument&) {
    fail(key, "expected a real number, got '" + v + "'");
  }
}

std::uint64_t as_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    fail(key, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::size_t as_positive(const std::string& key, const std::string& v) {
  const auto n = as_uint(key, v);
  if (n == 0) fail(key, "must be positive");
  return static_cast<std::size_t>(n);
}

template <typename T, typename Parse>
std::vector<T> as_list(const std::string& key, const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) fail(key, "empty list element");
    out.push_back(parse(key, item));
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

struct SchemeRequest {
  std::optional<SchemeKind> kind;
  std::optional<std::size_t> n_clients;
  std::optional<std::vector<double>> proportions;
};

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kCentral: return "central";
    case Mode::kCentralDp: return "central_dp";
    case Mode::kFed: return "fed";
    case Mode::kFedDp: return "fed_dp";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& name) {
  if (name == "central") return Mode::kCentral;
  if (name == "central_dp") return Mode::kCentralDp;
  if (name == "fed") return Mode::kFed;
  if (name == "fed_dp") return Mode::kFedDp;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (n_samples == 0) fail("n_samples", "must be positive");
  if (dataset == DatasetKind::kImageDir && image_dir.empty()) fail("image_dir", "required when dataset=image_dir");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail("test_fraction", "must lie in (0, 1)");
  if (!(paired_ratio >= 0.0 && paired_ratio <= 1.0)) fail("paired_ratio", "must lie in [0, 1]");
  try {
    scheme.validate();
  } catch (const std::invalid_argument& e) {
    fail("proportions", e.what());
  }
  try {
    models.generator.validate();
  } catch (const std::exception& e) {
    fail("gen_channels", e.what());
  }
  try {
    models.discriminator.validate();
  } catch (const std::exception& e) {
    fail("disc_channels", e.what());
  }
  if (models.generator.image_size != models.discriminator.image_size) {
    fail("image_size", "generator and discriminator disagree");
  }
  if (training.rounds == 0) fail("rounds", "must be positive");
  if (training.local_epochs == 0) fail("local_epochs", "must be positive");
  if (training.batch_size == 0) fail("batch_size", "must be positive");
  if (!(training.lr_g >= 0.0)) fail("lr_g", "must be non-negative");
  if (!(training.lr_d >= 0.0)) fail("lr_d", "must be non-negative");
  if (!(training.momentum_d >= 0.0 && training.momentum_d < 1.0)) fail("momentum_d", "must lie in [0, 1)");
  if (!(training.dp.clip_bound > 0.0)) fail("clip_bound", "must be positive");
  if (!(training.dp.noise_multiplier >= 0.0)) fail("noise_multiplier", "must be non-negative");
  if (!(training.loss_weights.lambda_cycle >= 0.0)) fail("lambda_cycle", "must be non-negative");
  if (!(training.loss_weights.lambda_paired >= 0.0)) fail("lambda_paired", "must be non-negative");
  if (training.dp.enabled != uses_dp(mode)) fail("mode", "DP flag does not match the mode");
  if (latent_samples < 2) fail("latent_samples", "must be at least 2");
  if (output_dir.empty()) fail("output_dir", "must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  SchemeRequest scheme;

  const std::map<std::string, Setter> setters{
      {"mode",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         try {
           c.mode = mode_from_string(v);
         } catch (const std::invalid_argument&) {
           fail(k, "expected central, central_dp, fed or fed_dp, got '" + v + "'");
         }
       }},
      {"dataset",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "synthetic") c.dataset = DatasetKind::kSynthetic;
         else if (v == "image_dir") c.dataset = DatasetKind::kImageDir;
         else fail(k, "expected synthetic or image_dir, got '" + v + "'");
       }},
      {"n_samples", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.n_samples = as_positive(k, v); }},
      {"data_seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.data_seed = as_uint(k, v); }},
      {"image_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.image_dir = v; }},
      {"image_size",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.models.generator.image_size = c.models.discriminator.image_size = as_positive(k, v);
       }},
      {"test_fraction", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.test_fraction = as_real(k, v); }},
      {"scheme",
       [&scheme](ExperimentConfig&, const std::string& k, const std::string& v) {
         try {
           scheme.kind = scheme_kind_from_string(v);
         } catch (const std::invalid_argument&) {
           fail(k, "expected average, gradual, extreme or explicit, got '" + v + "'");
         }
       }},
      {"n_clients", [&scheme](ExperimentConfig&, const std::string& k, const std::string& v) { scheme.n_clients = as_positive(k, v); }},
      {"proportions",
       [&scheme](ExperimentConfig&, const std::string& k, const std::string& v) {
         scheme.proportions = as_list<double>(k, v, as_real);
       }},
      {"paired_ratio", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.paired_ratio = as_real(k, v); }},
      {"rounds", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.rounds = as_positive(k, v); }},
      {"local_epochs", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.local_epochs = as_positive(k, v); }},
      {"epochs",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.training.central_epochs = static_cast<std::size_t>(as_uint(k, v));
       }},
      {"batch_size", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.batch_size = as_positive(k, v); }},
      {"lr_g", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.lr_g = as_real(k, v); }},
      {"lr_d", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.lr_d = as_real(k, v); }},
      {"momentum_d", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.momentum_d = as_real(k, v); }},
      {"clip_bound", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.dp.clip_bound = as_real(k, v); }},
      {"noise_multiplier",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.dp.noise_multiplier = as_real(k, v); }},
      {"lambda_cycle",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.loss_weights.lambda_cycle = as_real(k, v); }},
      {"lambda_paired",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.loss_weights.lambda_paired = as_real(k, v); }},
      {"gen_channels",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.models.generator.channels = as_list<std::size_t>(k, v, as_positive);
       }},
      {"disc_channels",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.models.discriminator.channels = as_list<std::size_t>(k, v, as_positive);
       }},
      {"latent_tap", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.models.generator.latent_tap_index = as_positive(k, v); }},
      {"latent_samples",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.latent_samples = as_positive(k, v); }},
      {"checkpoints",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "all") c.checkpoints = CheckpointPolicy::kAll;
         else if (v == "final") c.checkpoints = CheckpointPolicy::kFinal;
         else if (v == "none") c.checkpoints = CheckpointPolicy::kNone;
         else fail(k, "expected all, final or none, got '" + v + "'");
       }},
      {"output_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seed = as_uint(k, v); }},
      {"threads", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.training.threads = as_positive(k, v); }},
  };

  std::set<std::string> seen;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("config entry '" + token + "' is not key=value");
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      const auto it = setters.find(key);
      if (it == setters.end()) throw ConfigError("config key '" + key + "': unknown key");
      if (!seen.insert(key).second) fail(key, "given more than once");
      if (value.empty()) fail(key, "missing value");
      it->second(cfg, key, value);
    }
  }

  if (scheme.proportions) {
    if (scheme.kind && *scheme.kind != SchemeKind::kExplicit) fail("proportions", "only valid with scheme=explicit");
    if (scheme.n_clients && *scheme.n_clients != scheme.proportions->size()) {
      fail("n_clients", "does not match the number of proportions");
    }
    try {
      cfg.scheme = make_explicit_scheme(*scheme.proportions);
    } catch (const std::invalid_argument& e) {
      fail("proportions", e.what());
    }
  } else {
    const SchemeKind kind = scheme.kind.value_or(SchemeKind::kGradual);
    if (kind == SchemeKind::kExplicit) fail("proportions", "required when scheme=explicit");
    try {
      cfg.scheme = make_scheme(kind, scheme.n_clients.value_or(4));
    } catch (const std::invalid_argument& e) {
      fail("n_clients", e.what());
    }
  }
  cfg.training.dp.enabled = uses_dp(cfg.mode);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  const auto size_fmt = std::function<std::string(const std::size_t&)>([](const std::size_t& v) { return std::to_string(v); });
  const auto real_fmt = std::function<std::string(const double&)>([](const double& v) { return format_double(v); });
  os << "mode=" << to_string(c.mode) << '\n';
  os << "dataset=" << (c.dataset == DatasetKind::kSynthetic ? "synthetic" : "image_dir") << '\n';
  os << "n_samples=" << c.n_samples << '\n';
  if (c.data_seed) os << "data_seed=" << *c.data_seed << '\n';
  if (!c.image_dir.empty()) os << "image_dir=" << c.image_dir.string() << '\n';
  os << "image_size=" << c.image_size() << '\n';
  os << "test_fraction=" << format_double(c.test_fraction) << '\n';
  if (c.scheme.kind == SchemeKind::kExplicit) {
    os << "scheme=explicit\nproportions=" << join(c.scheme.proportions, real_fmt) << '\n';
  } else {
    os << "scheme=" << to_string(c.scheme.kind) << "\nn_clients=" << c.scheme.n_clients() << '\n';
  }
  os << "paired_ratio=" << format_double(c.paired_ratio) << '\n';
  os << "rounds=" << c.training.rounds << '\n';
  os << "local_epochs=" << c.training.local_epochs << '\n';
  os << "epochs=" << c.training.central_epochs << '\n';
  os << "batch_size=" << c.training.batch_size << '\n';
  os << "lr_g=" << format_double(c.training.lr_g) << '\n';
  os << "lr_d=" << format_double(c.training.lr_d) << '\n';
  os << "momentum_d=" << format_double(c.training.momentum_d) << '\n';
  os << "clip_bound=" << format_double(c.training.dp.clip_bound) << '\n';
  os << "noise_multiplier=" << format_double(c.training.dp.noise_multiplier) << '\n';
  os << "lambda_cycle=" << format_double(c.training.loss_weights.lambda_cycle) << '\n';
  os << "lambda_paired=" << format_double(c.training.loss_weights.lambda_paired) << '\n';
  os << "gen_channels=" << join(c.models.generator.channels, size_fmt) << '\n';
  os << "disc_channels=" << join(c.models.discriminator.channels, size_fmt) << '\n';
  os << "latent_tap=" << c.models.generator.latent_tap_index << '\n';
  os << "latent_samples=" << c.latent_samples << '\n';
  os << "checkpoints="
     << (c.checkpoints == CheckpointPolicy::kAll ? "all" : c.checkpoints == CheckpointPolicy::kFinal ? "final" : "none")
     << '\n';
  os << "output_dir=" << c.output_dir.string() << '\n';
  os << "seed=" << c.seed << '\n';
  os << "threads=" << c.training.threads << '\n';
  return os.str();
}

}  // namespace fedcyc
