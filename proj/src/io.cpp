#include "proseg/io.hpp"

#include <cstring>
#include <fstream>

namespace proseg {

namespace {

// This codebase assumes a little-endian host (checked once at startup of any
// IO call); payloads are defined little-endian.
void check_endianness() {
  const uint32_t probe = 1;
  char byte;
  std::memcpy(&byte, &probe, 1);
  if (byte != 1) throw std::runtime_error("big-endian hosts are not supported");
}

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    check_endianness();
    if (!out_) throw UsageError("cannot open for writing: " + path);
  }
  void bytes(const void* p, size_t n) { out_.write(static_cast<const char*>(p), n); }
  void magic(const char tag[8]) { bytes(tag, 8); }
  template <typename T>
  void pod(T v) {
    bytes(&v, sizeof(T));
  }
  void f64s(const double* p, size_t n) { bytes(p, n * sizeof(double)); }
  void matrix(const MatrixXd& m) {
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) pod<double>(m(r, c));
  }
  void vector(const VectorXd& v) { f64s(v.data(), v.size()); }
  void ints(const std::vector<int>& v) {
    pod<uint32_t>(static_cast<uint32_t>(v.size()));
    for (int x : v) pod<int32_t>(x);
  }
  void close() {
    out_.close();
    if (!out_) throw UsageError("write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    check_endianness();
    if (!in_) throw UsageError("cannot open: " + path);
  }
  void bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), n);
    if (static_cast<size_t>(in_.gcount()) != n)
      throw UsageError("truncated file: " + path_);
  }
  void magic(const char tag[8]) {
    char buf[8];
    bytes(buf, 8);
    if (std::memcmp(buf, tag, 8) != 0)
      throw UsageError("bad file magic in " + path_ + " (expected " +
                       std::string(tag, 8) + ")");
  }
  template <typename T>
  T pod() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  MatrixXd matrix(int rows, int cols) {
    MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = pod<double>();
    return m;
  }
  VectorXd vector(int n) {
    VectorXd v(n);
    bytes(v.data(), static_cast<size_t>(n) * sizeof(double));
    return v;
  }
  std::vector<int> ints() {
    uint32_t n = pod<uint32_t>();
    std::vector<int> v(n);
    for (uint32_t i = 0; i < n; ++i) v[i] = pod<int32_t>();
    return v;
  }

 private:
  std::ifstream in_;
  std::string path_;
};

constexpr char kFeatureMagic[8] = {'P', 'S', 'G', 'F', 'E', 'A', 'T', '1'};
constexpr char kLabelMagic[8] = {'P', 'S', 'G', 'L', 'A', 'B', 'S', '1'};
constexpr char kModelMagic[8] = {'P', 'S', 'G', 'M', 'O', 'D', 'L', '1'};
constexpr char kTrainMagic[8] = {'P', 'S', 'G', 'T', 'R', 'N', 'S', '1'};

void write_model_body(Writer& w, const ModelState& state) {
  const int n = state.n_words();
  const int k = state.n_letters();
  const int dy = state.spectral_dim();
  const int dp = state.prosody_dim();
  w.pod<uint32_t>(n);
  w.pod<uint32_t>(k);
  w.pod<uint32_t>(dy);
  w.pod<uint32_t>(dp);
  w.vector(state.beta_lm);
  w.matrix(state.pi_lm);
  w.vector(state.beta_wm);
  w.matrix(state.pi_wm);
  for (const auto& word : state.words) w.ints(word);
  for (const auto& g : state.emission_params) {
    w.vector(g.mean);
    w.matrix(g.cov);
  }
  w.vector(state.duration_rates);
  if (dp > 0) {
    w.vector(state.prosody_interior.mean);
    w.matrix(state.prosody_interior.cov);
    w.vector(state.prosody_boundary.mean);
    w.matrix(state.prosody_boundary.cov);
  }
}

ModelState read_model_body(Reader& r) {
  ModelState state;
  const int n = static_cast<int>(r.pod<uint32_t>());
  const int k = static_cast<int>(r.pod<uint32_t>());
  const int dy = static_cast<int>(r.pod<uint32_t>());
  const int dp = static_cast<int>(r.pod<uint32_t>());
  state.beta_lm = r.vector(n);
  state.pi_lm = r.matrix(n, n);
  state.beta_wm = r.vector(k);
  state.pi_wm = r.matrix(k, k);
  state.words.resize(n);
  for (auto& word : state.words) word = r.ints();
  state.emission_params.resize(k);
  for (auto& g : state.emission_params) {
    g.mean = r.vector(dy);
    g.cov = r.matrix(dy, dy);
  }
  state.duration_rates = r.vector(k);
  if (dp > 0) {
    state.prosody_interior.mean = r.vector(dp);
    state.prosody_interior.cov = r.matrix(dp, dp);
    state.prosody_boundary.mean = r.vector(dp);
    state.prosody_boundary.cov = r.matrix(dp, dp);
  }
  return state;
}

}  // namespace

AudioBuffer load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open: " + path);
  auto read_u32 = [&in, &path]() {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw UsageError("truncated WAV: " + path);
    return static_cast<uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
  };
  auto read_u16 = [&in, &path]() {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    if (!in) throw UsageError("truncated WAV: " + path);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
  };
  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0) throw UsageError("not a WAV file: " + path);
  read_u32();
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0) throw UsageError("not a WAV file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  AudioBuffer audio;
  while (in.read(tag, 4)) {
    uint32_t size = read_u32();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_u16();
      channels = read_u16();
      sample_rate = read_u32();
      read_u32();  // byte rate
      read_u16();  // block align
      bits = read_u16();
      if (size > 16) in.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw UsageError("WAV data before fmt chunk: " + path);
      if (channels < 1) throw UsageError("WAV with no channels: " + path);
      const bool pcm16 = format == 1 && bits == 16;
      const bool f32 = format == 3 && bits == 32;
      if (!pcm16 && !f32)
        throw UsageError("unsupported WAV encoding (need 16-bit PCM or float32): " + path);
      const uint32_t bytes_per_sample = bits / 8;
      const uint32_t n_samples = size / (bytes_per_sample * channels);
      audio.samples.resize(n_samples);
      std::vector<char> raw(static_cast<size_t>(bytes_per_sample) * channels);
      for (uint32_t i = 0; i < n_samples; ++i) {
        in.read(raw.data(), raw.size());
        if (!in) throw UsageError("truncated WAV: " + path);
        double acc = 0.0;
        for (uint16_t c = 0; c < channels; ++c) {
          if (pcm16) {
            int16_t v;
            std::memcpy(&v, raw.data() + 2 * c, 2);
            acc += v / 32768.0;
          } else {
            float v;
            std::memcpy(&v, raw.data() + 4 * c, 4);
            acc += v;
          }
        }
        audio.samples[i] = acc / channels;
      }
      audio.sample_rate = sample_rate;
      return audio;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  throw UsageError("WAV has no data chunk: " + path);
}

void write_wav(const std::string& path, const AudioBuffer& audio) {
  audio.check();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open for writing: " + path);
  auto u32 = [&out](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&out](uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
  const uint32_t n = static_cast<uint32_t>(audio.samples.size());
  out.write("RIFF", 4);
  u32(36 + 2 * n);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  u32(16);
  u16(1);
  u16(1);
  u32(static_cast<uint32_t>(audio.sample_rate));
  u32(static_cast<uint32_t>(audio.sample_rate) * 2);
  u16(2);
  u16(16);
  out.write("data", 4);
  u32(2 * n);
  for (double s : audio.samples) {
    double clamped = std::max(-1.0, std::min(1.0, s));
    auto v = static_cast<int16_t>(std::lround(clamped * 32767.0));
    out.write(reinterpret_cast<const char*>(&v), 2);
  }
}

void write_feature_file(const std::string& path, const ObservationSequence& seq,
                        double frame_shift_s) {
  seq.check();
  Writer w(path);
  w.magic(kFeatureMagic);
  w.pod<uint32_t>(static_cast<uint32_t>(seq.frames()));
  w.pod<uint32_t>(static_cast<uint32_t>(seq.spectral.cols()));
  w.pod<uint32_t>(static_cast<uint32_t>(seq.prosody.cols()));
  w.pod<double>(frame_shift_s);
  for (int t = 0; t < seq.frames(); ++t)
    for (int c = 0; c < seq.spectral.cols(); ++c)
      w.pod<float>(static_cast<float>(seq.spectral(t, c)));
  for (int t = 0; t < seq.frames(); ++t)
    for (int c = 0; c < seq.prosody.cols(); ++c)
      w.pod<float>(static_cast<float>(seq.prosody(t, c)));
  w.close();
}

FeatureData read_feature_file(const std::string& path) {
  Reader r(path);
  r.magic(kFeatureMagic);
  const int frames = static_cast<int>(r.pod<uint32_t>());
  const int dy = static_cast<int>(r.pod<uint32_t>());
  const int dp = static_cast<int>(r.pod<uint32_t>());
  FeatureData data;
  data.frame_shift_s = r.pod<double>();
  data.sequence.spectral.resize(frames, dy);
  data.sequence.prosody.resize(frames, dp);
  for (int t = 0; t < frames; ++t)
    for (int c = 0; c < dy; ++c) data.sequence.spectral(t, c) = r.pod<float>();
  for (int t = 0; t < frames; ++t)
    for (int c = 0; c < dp; ++c) data.sequence.prosody(t, c) = r.pod<float>();
  return data;
}

void write_label_file(const std::string& path, const std::vector<int>& letters,
                      const std::vector<int>& words) {
  if (letters.size() != words.size())
    throw std::invalid_argument("label columns differ in length");
  Writer w(path);
  w.magic(kLabelMagic);
  w.pod<uint32_t>(static_cast<uint32_t>(letters.size()));
  for (size_t t = 0; t < letters.size(); ++t) {
    w.pod<int32_t>(letters[t]);
    w.pod<int32_t>(words[t]);
  }
  w.close();
}

std::pair<std::vector<int>, std::vector<int>> read_label_file(const std::string& path) {
  Reader r(path);
  r.magic(kLabelMagic);
  const uint32_t frames = r.pod<uint32_t>();
  std::vector<int> letters(frames), words(frames);
  for (uint32_t t = 0; t < frames; ++t) {
    letters[t] = r.pod<int32_t>();
    words[t] = r.pod<int32_t>();
  }
  return {letters, words};
}

void save_model(const std::string& path, const ModelState& state) {
  Writer w(path);
  w.magic(kModelMagic);
  write_model_body(w, state);
  w.close();
}

ModelState load_model(const std::string& path) {
  Reader r(path);
  r.magic(kModelMagic);
  return read_model_body(r);
}

void save_train_state(const std::string& path, const TrainState& ts) {
  Writer w(path);
  w.magic(kTrainMagic);
  w.pod<uint64_t>(ts.rng_seed);
  w.pod<uint32_t>(static_cast<uint32_t>(ts.sweep_index));
  w.pod<uint32_t>(static_cast<uint32_t>(ts.segmentations.size()));
  write_model_body(w, ts.model);
  for (const auto& seg : ts.segmentations) {
    w.ints(seg.word_labels);
    w.ints(seg.word_durations);
    w.ints(seg.letter_labels);
    w.pod<uint32_t>(static_cast<uint32_t>(seg.letter_durations.size()));
    for (const auto& durations : seg.letter_durations) w.ints(durations);
  }
  w.pod<uint32_t>(static_cast<uint32_t>(ts.trace.size()));
  for (const auto& entry : ts.trace) {
    w.pod<double>(entry.log_joint);
    w.pod<double>(entry.letter_ari);
    w.pod<double>(entry.word_ari);
    w.pod<double>(entry.wall_ms);
  }
  w.close();
}

TrainState load_train_state(const std::string& path) {
  Reader r(path);
  r.magic(kTrainMagic);
  TrainState ts;
  ts.rng_seed = r.pod<uint64_t>();
  ts.sweep_index = static_cast<int>(r.pod<uint32_t>());
  const uint32_t n_seqs = r.pod<uint32_t>();
  ts.model = read_model_body(r);
  ts.segmentations.resize(n_seqs);
  for (auto& seg : ts.segmentations) {
    seg.word_labels = r.ints();
    seg.word_durations = r.ints();
    seg.letter_labels = r.ints();
    const uint32_t n_segments = r.pod<uint32_t>();
    seg.letter_durations.resize(n_segments);
    for (auto& durations : seg.letter_durations) durations = r.ints();
    seg.boundary_flags =
        derive_boundary_flags(seg.word_durations, static_cast<int>(seg.letter_labels.size()));
  }
  const uint32_t n_trace = r.pod<uint32_t>();
  ts.trace.resize(n_trace);
  for (auto& entry : ts.trace) {
    entry.log_joint = r.pod<double>();
    entry.letter_ari = r.pod<double>();
    entry.word_ari = r.pod<double>();
    entry.wall_ms = r.pod<double>();
  }
  return ts;
}

}  // namespace proseg
