// proseg: unsupervised word/phone-unit discovery from feature time series
// with prosodic boundary cues. Subcommands: extract | generate | train |
// eval | plotdata.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "proseg/config.hpp"
#include "proseg/eval.hpp"
#include "proseg/io.hpp"
#include "proseg/numeric.hpp"

namespace fs = std::filesystem;
using namespace proseg;

namespace {

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == extension)
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct LoadedData {
  std::vector<ObservationSequence> sequences;  // prosody columns already selected
  std::vector<FrameLabels> truth;
  bool has_truth = false;
  std::vector<std::string> ids;
  int raw_prosody_dim = 0;
};

LoadedData load_dataset(const fs::path& data_dir, const std::string& prosody_mode) {
  auto files = sorted_files(data_dir, ".feat");
  if (files.empty()) throw UsageError("no .feat files in " + data_dir.string());
  LoadedData data;
  data.has_truth = true;
  std::vector<int> channels;
  for (const auto& path : files) {
    FeatureData fd = read_feature_file(path.string());
    if (data.sequences.empty()) {
      data.raw_prosody_dim = static_cast<int>(fd.sequence.prosody.cols());
      channels = prosody_mode_channels(prosody_mode, data.raw_prosody_dim);
    }
    ObservationSequence seq;
    seq.id = path.stem().string();
    seq.spectral = fd.sequence.spectral;
    seq.prosody.resize(fd.sequence.frames(), static_cast<int>(channels.size()));
    for (size_t c = 0; c < channels.size(); ++c)
      seq.prosody.col(c) = fd.sequence.prosody.col(channels[c]);
    data.ids.push_back(seq.id);
    data.sequences.push_back(std::move(seq));

    fs::path label_path = path;
    label_path.replace_extension(".labels");
    if (fs::exists(label_path)) {
      auto [letters, words] = read_label_file(label_path.string());
      if (letters.size() != static_cast<size_t>(fd.sequence.frames()))
        throw UsageError("label/feature frame mismatch for " + path.string());
      data.truth.push_back({std::move(letters), std::move(words)});
    } else {
      data.has_truth = false;
    }
  }
  if (!data.has_truth) data.truth.clear();
  return data;
}

int cmd_extract(const std::string& audio_dir, const std::string& out_dir,
                const std::string& config_path) {
  ProsodyConfig cfg;
  if (!config_path.empty()) {
    KeyValueFile kv = KeyValueFile::parse(config_path);
    cfg.f0_frame_s = kv.get_double("f0_frame_s", cfg.f0_frame_s);
    cfg.f0_min_hz = kv.get_double("f0_min_hz", cfg.f0_min_hz);
    cfg.f0_max_hz = kv.get_double("f0_max_hz", cfg.f0_max_hz);
    cfg.silence_threshold_db = kv.get_double("silence_threshold_db", cfg.silence_threshold_db);
    cfg.silence_min_s = kv.get_double("silence_min_s", cfg.silence_min_s);
    cfg.mfcc_frame_s = kv.get_double("mfcc_frame_s", cfg.mfcc_frame_s);
    cfg.mfcc_shift_s = kv.get_double("mfcc_shift_s", cfg.mfcc_shift_s);
    cfg.mfcc_dim = kv.get_int("mfcc_dim", cfg.mfcc_dim);
    cfg.use_deltas = kv.get_bool("use_deltas", cfg.use_deltas);
    kv.reject_unknown_keys();
  }
  cfg.check();
  auto files = sorted_files(audio_dir, ".wav");
  if (files.empty()) throw UsageError("no .wav files in " + audio_dir);
  fs::create_directories(out_dir);
  int failures = 0;
  for (const auto& path : files) {
    try {
      AudioBuffer audio = load_wav(path.string());
      ObservationSequence seq = assemble_features(audio, cfg, path.stem().string());
      fs::path out = fs::path(out_dir) / (path.stem().string() + ".feat");
      write_feature_file(out.string(), seq, cfg.mfcc_shift_s);
      std::cout << path.filename().string() << " -> " << out.string() << " (" << seq.frames()
                << " frames)\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cerr << "error: " << path.filename().string() << ": " << e.what() << "\n";
    }
  }
  if (failures > 0) {
    std::cerr << failures << " file(s) failed\n";
    return 1;
  }
  return 0;
}

int cmd_generate(const std::string& spec_path, const std::string& out_dir) {
  CorpusSpec spec = parse_corpus_spec(spec_path);
  GeneratedCorpus corpus = generate(spec);
  fs::create_directories(out_dir);
  std::ofstream tokens(fs::path(out_dir) / "tokens.csv");
  tokens << "sequence,position,word\n";
  for (size_t i = 0; i < corpus.sequences.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "seq_%04zu", i);
    const fs::path base = fs::path(out_dir) / name;
    write_feature_file(base.string() + ".feat", corpus.sequences[i], 0.01);
    write_label_file(base.string() + ".labels", corpus.truths[i].letter_labels,
                     corpus.truths[i].word_labels);
    for (size_t s = 0; s < corpus.truths[i].word_ids.size(); ++s)
      tokens << i << "," << s << "," << corpus.truths[i].word_ids[s] << "\n";
  }
  save_model((fs::path(out_dir) / "generating.model").string(), corpus.model);
  std::cout << "wrote " << corpus.sequences.size() << " sequences to " << out_dir << "\n";
  return 0;
}

void write_train_log(const fs::path& path, const TrainState& ts) {
  std::ofstream log(path);
  log << "sweep,log_joint,letter_ari,word_ari,wall_time_ms\n";
  for (size_t s = 0; s < ts.trace.size(); ++s) {
    const auto& e = ts.trace[s];
    log << (s + 1) << "," << format_double(e.log_joint) << "," << format_double(e.letter_ari)
        << "," << format_double(e.word_ari) << "," << format_double(e.wall_ms) << "\n";
  }
}

int cmd_train(const std::string& config_path, const std::string& data_dir_override,
              const std::string& out_dir_override, bool allow_resume) {
  RunConfig cfg = parse_run_config(config_path);
  if (!data_dir_override.empty()) cfg.data_dir = data_dir_override;
  if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
  if (const char* env = std::getenv("PROSEG_OUT_DIR"); env && *env) cfg.out_dir = env;
  if (const char* env = std::getenv("PROSEG_WORKERS"); env && *env) cfg.workers = std::atoi(env);
  if (cfg.data_dir.empty()) throw UsageError("data_dir not set (config or --data-dir)");
  if (cfg.out_dir.empty()) throw UsageError("out_dir not set (config or --out-dir)");

  LoadedData data = load_dataset(cfg.data_dir, cfg.prosody_mode);
  const int dy = static_cast<int>(data.sequences.front().spectral.cols());
  const int dp = static_cast<int>(data.sequences.front().prosody.cols());
  Hyperparameters hp = materialize_hyperparameters(cfg, dy, dp);
  GibbsOptions opts;
  opts.fresh_words = cfg.fresh_words;
  opts.workers = cfg.workers;

  const fs::path mode_dir = fs::path(cfg.out_dir) / cfg.prosody_mode;
  fs::create_directories(mode_dir);
  {
    std::ofstream meta(mode_dir / "run.meta");
    meta << "mode = " << cfg.prosody_mode << "\n";
    meta << "n_trials = " << cfg.n_trials << "\n";
    meta << "n_sweeps = " << cfg.n_sweeps << "\n";
    meta << "seed = " << cfg.seed << "\n";
  }

  for (int trial = 0; trial < cfg.n_trials; ++trial) {
    char name[32];
    std::snprintf(name, sizeof(name), "trial_%03d", trial);
    const fs::path trial_dir = mode_dir / name;
    fs::create_directories(trial_dir);
    const uint64_t trial_seed = derive_seed(cfg.seed, 0x7472, trial);
    const fs::path resume_path = trial_dir / "resume.bin";

    TrainState ts;
    if (allow_resume && fs::exists(resume_path)) {
      ts = load_train_state(resume_path.string());
      if (ts.rng_seed != trial_seed)
        throw UsageError("resume state in " + resume_path.string() +
                         " was produced under a different seed");
      std::cout << name << ": resuming at sweep " << ts.sweep_index << "\n";
    } else {
      ts = init(data.sequences, hp, trial_seed, opts);
    }

    auto after_sweep = [&](const TrainState& state) {
      if (state.sweep_index % cfg.checkpoint_every == 0 || state.sweep_index == cfg.n_sweeps)
        save_train_state(resume_path.string(), state);
    };
    resume(ts, data.sequences, hp, cfg.n_sweeps, opts,
           data.has_truth ? &data.truth : nullptr, after_sweep);

    write_train_log(trial_dir / "train_log.csv", ts);
    save_model((trial_dir / "final.model").string(), ts.model);
    for (size_t i = 0; i < data.sequences.size(); ++i) {
      FrameLabels pred = frame_labels(ts.segmentations[i]);
      write_label_file((trial_dir / ("pred_" + data.ids[i] + ".labels")).string(),
                       pred.letters, pred.words);
    }
    const auto& last = ts.trace.back();
    std::cout << name << ": " << cfg.n_sweeps << " sweeps, log joint "
              << format_double(last.log_joint);
    if (data.has_truth)
      std::cout << ", letter ARI " << last.letter_ari << ", word ARI " << last.word_ari;
    std::cout << "\n";
  }
  return 0;
}

struct TrialMetrics {
  std::string mode;
  int trial = 0;
  int sweep = 0;
  double letter_ari = 0.0, word_ari = 0.0;
  double letter_ari_utt = 0.0, word_ari_utt = 0.0;
  BoundaryPRF prf;
};

std::vector<int> word_segment_boundaries(const std::vector<int>& words) {
  std::vector<int> bounds;
  for (size_t t = 0; t + 1 < words.size(); ++t)
    if (words[t] != words[t + 1]) bounds.push_back(static_cast<int>(t));
  if (!words.empty()) bounds.push_back(static_cast<int>(words.size()) - 1);
  return bounds;
}

int cmd_eval(const std::string& run_dir, const std::string& labels_dir,
             const std::string& out_dir_arg, int boundary_tolerance) {
  if (!fs::is_directory(run_dir)) throw UsageError("not a directory: " + run_dir);
  const fs::path out_dir = out_dir_arg.empty() ? fs::path(run_dir) : fs::path(out_dir_arg);

  // truth, keyed by sequence id
  std::map<std::string, FrameLabels> truth;
  for (const auto& path : sorted_files(labels_dir, ".labels")) {
    auto [letters, words] = read_label_file(path.string());
    truth[path.stem().string()] = {std::move(letters), std::move(words)};
  }
  if (truth.empty()) throw UsageError("no .labels files in " + labels_dir);

  std::vector<TrialMetrics> rows;
  for (const auto& mode_entry : fs::directory_iterator(run_dir)) {
    if (!mode_entry.is_directory() || !fs::exists(mode_entry.path() / "run.meta")) continue;
    KeyValueFile meta = KeyValueFile::parse((mode_entry.path() / "run.meta").string());
    const std::string mode = meta.get_string("mode", mode_entry.path().filename().string());
    const int n_sweeps = meta.get_int("n_sweeps", 0);
    std::vector<fs::path> trial_dirs;
    for (const auto& trial_entry : fs::directory_iterator(mode_entry.path()))
      if (trial_entry.is_directory() &&
          trial_entry.path().filename().string().rfind("trial_", 0) == 0)
        trial_dirs.push_back(trial_entry.path());
    std::sort(trial_dirs.begin(), trial_dirs.end());

    for (const auto& trial_dir : trial_dirs) {
      TrialMetrics m;
      m.mode = mode;
      m.trial = std::atoi(trial_dir.filename().string().substr(6).c_str());
      m.sweep = n_sweeps;
      std::vector<int> pred_letters, pred_words, true_letters, true_words;
      std::vector<double> utt_letter, utt_word;
      int matched = 0;
      double p_sum = 0, r_sum = 0;
      std::vector<int> all_true_bounds, all_pred_bounds;
      int offset = 0;
      for (const auto& [id, t] : truth) {
        fs::path pred_path = trial_dir / ("pred_" + id + ".labels");
        if (!fs::exists(pred_path)) continue;
        ++matched;
        auto [pl, pw] = read_label_file(pred_path.string());
        if (pl.size() != t.letters.size())
          throw UsageError("prediction/truth frame mismatch for " + id);
        utt_letter.push_back(adjusted_rand_index(t.letters, pl));
        utt_word.push_back(adjusted_rand_index(t.words, pw));
        for (int b : word_segment_boundaries(t.words)) all_true_bounds.push_back(b + offset);
        for (int b : word_segment_boundaries(pw)) all_pred_bounds.push_back(b + offset);
        offset += static_cast<int>(pl.size()) + 1000;  // keep sequences apart
        pred_letters.insert(pred_letters.end(), pl.begin(), pl.end());
        pred_words.insert(pred_words.end(), pw.begin(), pw.end());
        true_letters.insert(true_letters.end(), t.letters.begin(), t.letters.end());
        true_words.insert(true_words.end(), t.words.begin(), t.words.end());
      }
      if (matched == 0)
        throw UsageError("no predictions matching the labels in " + trial_dir.string());
      m.letter_ari = adjusted_rand_index(true_letters, pred_letters);
      m.word_ari = adjusted_rand_index(true_words, pred_words);
      m.letter_ari_utt = mean(utt_letter);
      m.word_ari_utt = mean(utt_word);
      m.prf = boundary_prf(all_true_bounds, all_pred_bounds, boundary_tolerance);
      (void)p_sum;
      (void)r_sum;
      rows.push_back(m);
    }
  }
  if (rows.empty()) throw UsageError("no completed runs under " + run_dir);

  fs::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "metrics.csv");
    csv << "mode,trial,sweep,letter_ari,word_ari,letter_ari_utt,word_ari_utt,"
           "boundary_p,boundary_r,boundary_f1\n";
    for (const auto& m : rows)
      csv << m.mode << "," << m.trial << "," << m.sweep << "," << format_double(m.letter_ari)
          << "," << format_double(m.word_ari) << "," << format_double(m.letter_ari_utt) << ","
          << format_double(m.word_ari_utt) << "," << format_double(m.prf.precision) << ","
          << format_double(m.prf.recall) << "," << format_double(m.prf.f1) << "\n";
  }

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_mode;
  for (const auto& m : rows) {
    by_mode[m.mode].first.push_back(m.letter_ari);
    by_mode[m.mode].second.push_back(m.word_ari);
  }
  std::ofstream summary(out_dir / "summary.txt");
  auto fmt_pm = [](const std::vector<double>& xs) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f±%.3f", mean(xs), sample_stddev(xs));
    return std::string(buf);
  };
  for (const auto& [mode, aris] : by_mode) {
    summary << mode << ": letter ARI " << fmt_pm(aris.first) << ", word ARI "
            << fmt_pm(aris.second) << " (" << aris.first.size() << " trials)\n";
    std::cout << mode << ": letter ARI " << fmt_pm(aris.first) << ", word ARI "
              << fmt_pm(aris.second) << "\n";
  }
  for (auto a = by_mode.begin(); a != by_mode.end(); ++a)
    for (auto b = std::next(a); b != by_mode.end(); ++b) {
      if (a->second.first.size() < 2 || b->second.first.size() < 2) continue;
      auto letter_test = welch_t_test(a->second.first, b->second.first);
      auto word_test = welch_t_test(a->second.second, b->second.second);
      summary << a->first << " vs " << b->first << ": letter ARI p="
              << format_double(letter_test.p_two_sided)
              << ", word ARI p=" << format_double(word_test.p_two_sided) << " (Welch)\n";
    }
  std::cout << "wrote " << (out_dir / "metrics.csv").string() << "\n";
  return 0;
}

int cmd_plotdata(const std::string& run_dir, const std::string& data_dir,
                 const std::string& out_dir_arg) {
  if (run_dir.empty() && data_dir.empty())
    throw UsageError("plotdata needs --run-dir and/or --data-dir");
  const fs::path out_dir =
      out_dir_arg.empty() ? fs::path(run_dir.empty() ? data_dir : run_dir) : fs::path(out_dir_arg);
  fs::create_directories(out_dir);

  if (!run_dir.empty()) {
    if (!fs::is_directory(run_dir)) throw UsageError("not a directory: " + run_dir);
    std::ofstream csv(out_dir / "ari_vs_sweep.csv");
    csv << "mode,trial,sweep,log_joint,letter_ari,word_ari\n";
    bool any = false;
    for (const auto& mode_entry : fs::directory_iterator(run_dir)) {
      if (!mode_entry.is_directory() || !fs::exists(mode_entry.path() / "run.meta")) continue;
      const std::string mode = mode_entry.path().filename().string();
      for (const auto& trial_entry : fs::directory_iterator(mode_entry.path())) {
        fs::path log = trial_entry.path() / "train_log.csv";
        if (!trial_entry.is_directory() || !fs::exists(log)) continue;
        std::ifstream in(log);
        std::string line;
        std::getline(in, line);  // header
        const std::string trial = trial_entry.path().filename().string().substr(6);
        while (std::getline(in, line)) {
          // sweep,log_joint,letter_ari,word_ari,wall_time_ms -> drop wall time
          auto last_comma = line.rfind(',');
          csv << mode << "," << trial << "," << line.substr(0, last_comma) << "\n";
          any = true;
        }
      }
    }
    if (!any) throw UsageError("no train logs under " + run_dir);
  }

  if (!data_dir.empty()) {
    std::map<int, long> counts;
    fs::path tokens_path = fs::path(data_dir) / "tokens.csv";
    if (fs::exists(tokens_path)) {
      std::ifstream in(tokens_path);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        auto last_comma = line.rfind(',');
        counts[std::atoi(line.c_str() + last_comma + 1)] += 1;
      }
    } else {
      // fall back to run-length token counts over the label files
      for (const auto& path : sorted_files(data_dir, ".labels")) {
        auto [letters, words] = read_label_file(path.string());
        for (size_t t = 0; t < words.size(); ++t)
          if (t + 1 == words.size() || words[t] != words[t + 1]) counts[words[t]] += 1;
      }
    }
    if (counts.empty()) throw UsageError("no token data in " + data_dir);
    std::vector<long> freq;
    for (const auto& [word, count] : counts) freq.push_back(count);
    std::sort(freq.rbegin(), freq.rend());
    std::ofstream csv(out_dir / "rank_frequency.csv");
    csv << "rank,count\n";
    for (size_t r = 0; r < freq.size(); ++r) csv << (r + 1) << "," << freq[r] << "\n";
  }
  std::cout << "wrote plot data to " << out_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unsupervised word and phone-unit discovery with prosodic cues"};
  app.require_subcommand(1);

  auto* extract = app.add_subcommand("extract", "WAV directory -> feature files");
  std::string audio_dir, ex_out, ex_config;
  extract->add_option("--audio-dir", audio_dir, "directory of .wav files")->required();
  extract->add_option("--out-dir", ex_out, "output directory")->required();
  extract->add_option("--config", ex_config, "extraction parameter file");

  auto* generate = app.add_subcommand("generate", "synthetic labeled corpus");
  std::string spec_path, gen_out;
  generate->add_option("--spec", spec_path, "corpus spec file")->required();
  generate->add_option("--out-dir", gen_out, "output directory")->required();

  auto* train = app.add_subcommand("train", "blocked Gibbs training");
  std::string train_config, train_data, train_out;
  bool train_resume = false;
  train->add_option("--config", train_config, "run config file")->required();
  train->add_option("--data-dir", train_data, "override data_dir");
  train->add_option("--out-dir", train_out, "override out_dir");
  train->add_flag("--resume", train_resume, "continue from resume.bin when present");

  auto* eval_cmd = app.add_subcommand("eval", "score a finished run against labels");
  std::string eval_run, eval_labels, eval_out;
  int eval_tol = 2;
  eval_cmd->add_option("--run-dir", eval_run, "training output directory")->required();
  eval_cmd->add_option("--labels-dir", eval_labels, "ground-truth labels directory")->required();
  eval_cmd->add_option("--out-dir", eval_out, "metrics output directory (default run dir)");
  eval_cmd->add_option("--boundary-tolerance", eval_tol, "frames of slack for boundary match");

  auto* plotdata = app.add_subcommand("plotdata", "numeric series for external plotting");
  std::string plot_run, plot_data, plot_out;
  plotdata->add_option("--run-dir", plot_run, "training output directory");
  plotdata->add_option("--data-dir", plot_data, "dataset directory (rank-frequency)");
  plotdata->add_option("--out-dir", plot_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*extract) return cmd_extract(audio_dir, ex_out, ex_config);
    if (*generate) return cmd_generate(spec_path, gen_out);
    if (*train) return cmd_train(train_config, train_data, train_out, train_resume);
    if (*eval_cmd) return cmd_eval(eval_run, eval_labels, eval_out, eval_tol);
    if (*plotdata) return cmd_plotdata(plot_run, plot_data, plot_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
