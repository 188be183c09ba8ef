#include "proseg/config.hpp"

#include <fstream>
#include <sstream>

#include "proseg/io.hpp"

namespace proseg {

namespace {

std::string trim(const std::string& s) {
  size_t lo = s.find_first_not_of(" \t\r\n");
  if (lo == std::string::npos) return "";
  size_t hi = s.find_last_not_of(" \t\r\n");
  return s.substr(lo, hi - lo + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str(), path);
}

KeyValueFile KeyValueFile::parse_text(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (kv.values_.count(key))
      throw UsageError(origin + ": duplicate key '" + key + "'");
    kv.values_[key] = value;
    kv.consumed_[key] = false;
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  return it->second;
}

double KeyValueFile::get_double(const std::string& key, double fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError(origin_ + ": key '" + key + "' is not a number: " + it->second);
  }
}

int KeyValueFile::get_int(const std::string& key, int fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  try {
    size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw UsageError(origin_ + ": key '" + key + "' is not an integer: " + it->second);
  }
}

uint64_t KeyValueFile::get_uint64(const std::string& key, uint64_t fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError(origin_ + ": key '" + key + "' is not an integer: " + it->second);
  }
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw UsageError(origin_ + ": key '" + key + "' is not a boolean: " + it->second);
}

void KeyValueFile::reject_unknown_keys() const {
  for (const auto& [key, used] : consumed_)
    if (!used) throw UsageError(origin_ + ": unknown key '" + key + "'");
}

void RunConfig::check() const {
  if (n_trials < 1) throw UsageError("n_trials must be at least 1");
  if (n_sweeps < 1) throw UsageError("n_sweeps must be at least 1");
  if (checkpoint_every < 1) throw UsageError("checkpoint_every must be at least 1");
  if (fresh_words < 0) throw UsageError("fresh_words must be nonnegative");
  if (prosody_mode != "none" && prosody_mode != "pause" && prosody_mode != "f0" &&
      prosody_mode != "both")
    throw UsageError("prosody_mode must be one of none|pause|f0|both");
}

namespace {

void read_prosody_config(KeyValueFile& kv, ProsodyConfig& p) {
  p.f0_frame_s = kv.get_double("f0_frame_s", p.f0_frame_s);
  p.f0_min_hz = kv.get_double("f0_min_hz", p.f0_min_hz);
  p.f0_max_hz = kv.get_double("f0_max_hz", p.f0_max_hz);
  p.silence_threshold_db = kv.get_double("silence_threshold_db", p.silence_threshold_db);
  p.silence_min_s = kv.get_double("silence_min_s", p.silence_min_s);
  p.mfcc_frame_s = kv.get_double("mfcc_frame_s", p.mfcc_frame_s);
  p.mfcc_shift_s = kv.get_double("mfcc_shift_s", p.mfcc_shift_s);
  p.mfcc_dim = kv.get_int("mfcc_dim", p.mfcc_dim);
  p.use_deltas = kv.get_bool("use_deltas", p.use_deltas);
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  KeyValueFile kv = KeyValueFile::parse(path);
  RunConfig cfg;
  cfg.gamma_lm = kv.get_double("gamma_lm", cfg.gamma_lm);
  cfg.alpha_lm = kv.get_double("alpha_lm", cfg.alpha_lm);
  cfg.gamma_wm = kv.get_double("gamma_wm", cfg.gamma_wm);
  cfg.alpha_wm = kv.get_double("alpha_wm", cfg.alpha_wm);
  cfg.duration_shape = kv.get_double("duration_shape", cfg.duration_shape);
  cfg.duration_rate = kv.get_double("duration_rate", cfg.duration_rate);
  cfg.emission_mu0 = kv.get_double("emission_mu0", cfg.emission_mu0);
  cfg.emission_kappa0 = kv.get_double("emission_kappa0", cfg.emission_kappa0);
  cfg.emission_sigma0 = kv.get_double("emission_sigma0", cfg.emission_sigma0);
  cfg.emission_nu0 = kv.get_double("emission_nu0", cfg.emission_nu0);
  cfg.prosody_boundary_mu0 = kv.get_double("prosody_boundary_mu0", cfg.prosody_boundary_mu0);
  cfg.prosody_boundary_kappa0 =
      kv.get_double("prosody_boundary_kappa0", cfg.prosody_boundary_kappa0);
  cfg.prosody_boundary_sigma0 =
      kv.get_double("prosody_boundary_sigma0", cfg.prosody_boundary_sigma0);
  cfg.prosody_boundary_nu0 = kv.get_double("prosody_boundary_nu0", cfg.prosody_boundary_nu0);
  cfg.prosody_interior_mu0 = kv.get_double("prosody_interior_mu0", cfg.prosody_interior_mu0);
  cfg.prosody_interior_kappa0 =
      kv.get_double("prosody_interior_kappa0", cfg.prosody_interior_kappa0);
  cfg.prosody_interior_sigma0 =
      kv.get_double("prosody_interior_sigma0", cfg.prosody_interior_sigma0);
  cfg.prosody_interior_nu0 = kv.get_double("prosody_interior_nu0", cfg.prosody_interior_nu0);
  cfg.max_letters = kv.get_int("max_letters", cfg.max_letters);
  cfg.max_words = kv.get_int("max_words", cfg.max_words);
  cfg.max_word_duration = kv.get_int("max_word_duration", cfg.max_word_duration);
  cfg.max_word_length = kv.get_int("max_word_length", cfg.max_word_length);
  cfg.fresh_words = kv.get_int("fresh_words", cfg.fresh_words);
  cfg.prosody_mode = kv.get_string("prosody_mode", cfg.prosody_mode);
  cfg.n_sweeps = kv.get_int("n_sweeps", cfg.n_sweeps);
  cfg.n_trials = kv.get_int("n_trials", cfg.n_trials);
  cfg.checkpoint_every = kv.get_int("checkpoint_every", cfg.checkpoint_every);
  cfg.workers = kv.get_int("workers", cfg.workers);
  cfg.seed = kv.get_uint64("seed", cfg.seed);
  cfg.data_dir = kv.get_string("data_dir", cfg.data_dir);
  cfg.out_dir = kv.get_string("out_dir", cfg.out_dir);
  read_prosody_config(kv, cfg.prosody);
  kv.reject_unknown_keys();
  cfg.check();
  return cfg;
}

CorpusSpec parse_corpus_spec(const std::string& path) {
  KeyValueFile kv = KeyValueFile::parse(path);
  CorpusSpec spec;
  spec.n_words = kv.get_int("n_words", spec.n_words);
  spec.n_letters = kv.get_int("n_letters", spec.n_letters);
  spec.letters_per_word_min = kv.get_int("letters_per_word_min", spec.letters_per_word_min);
  spec.letters_per_word_max = kv.get_int("letters_per_word_max", spec.letters_per_word_max);
  spec.n_sequences = kv.get_int("n_sequences", spec.n_sequences);
  spec.words_per_sequence_min =
      kv.get_int("words_per_sequence_min", spec.words_per_sequence_min);
  spec.words_per_sequence_max =
      kv.get_int("words_per_sequence_max", spec.words_per_sequence_max);
  spec.zipf_alpha = kv.get_double("zipf_alpha", spec.zipf_alpha);
  spec.emission_separation = kv.get_double("emission_separation", spec.emission_separation);
  spec.mean_letter_duration =
      kv.get_double("mean_letter_duration", spec.mean_letter_duration);
  spec.spectral_dim = kv.get_int("spectral_dim", spec.spectral_dim);
  int prosody_dim = kv.get_int("prosody_dim", 2);
  double boundary_mean = kv.get_double("prosody_boundary_mean", 1.0);
  double interior_mean = kv.get_double("prosody_interior_mean", 0.0);
  spec.prosody_boundary_mean = VectorXd::Constant(prosody_dim, boundary_mean);
  spec.prosody_interior_mean = VectorXd::Constant(prosody_dim, interior_mean);
  spec.seed = kv.get_uint64("seed", spec.seed);
  kv.reject_unknown_keys();
  try {
    spec.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  }
  return spec;
}

Hyperparameters materialize_hyperparameters(const RunConfig& cfg, int spectral_dim,
                                            int prosody_dim) {
  Hyperparameters hp;
  hp.gamma_lm = cfg.gamma_lm;
  hp.alpha_lm = cfg.alpha_lm;
  hp.gamma_wm = cfg.gamma_wm;
  hp.alpha_wm = cfg.alpha_wm;
  hp.duration_shape = cfg.duration_shape;
  hp.duration_rate = cfg.duration_rate;
  hp.max_letters = cfg.max_letters;
  hp.max_words = cfg.max_words;
  hp.max_word_duration = cfg.max_word_duration;
  hp.max_word_length = cfg.max_word_length;
  auto nu = [](double configured, int dim) {
    return configured > 0 ? configured : dim + 2.0;
  };
  hp.emission_niw = NIWParams::isotropic(spectral_dim, cfg.emission_mu0, cfg.emission_kappa0,
                                         cfg.emission_sigma0,
                                         nu(cfg.emission_nu0, spectral_dim));
  if (prosody_dim > 0) {
    hp.prosody_niw_boundary = NIWParams::isotropic(
        prosody_dim, cfg.prosody_boundary_mu0, cfg.prosody_boundary_kappa0,
        cfg.prosody_boundary_sigma0, nu(cfg.prosody_boundary_nu0, prosody_dim));
    hp.prosody_niw_interior = NIWParams::isotropic(
        prosody_dim, cfg.prosody_interior_mu0, cfg.prosody_interior_kappa0,
        cfg.prosody_interior_sigma0, nu(cfg.prosody_interior_nu0, prosody_dim));
  }
  hp.check();
  return hp;
}

std::vector<int> prosody_mode_channels(const std::string& mode, int available_dims) {
  std::vector<int> channels;
  if (mode == "none") return channels;
  if (mode == "f0")
    channels = {0};
  else if (mode == "pause")
    channels = {1};
  else if (mode == "both")
    channels = {0, 1};
  else
    throw UsageError("unknown prosody mode: " + mode);
  for (int c : channels)
    if (c >= available_dims)
      throw UsageError("prosody mode '" + mode + "' needs channel " + std::to_string(c) +
                       " but the data has only " + std::to_string(available_dims) +
                       " prosody channels");
  return channels;
}

}  // namespace proseg
