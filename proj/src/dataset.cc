// src/dataset.cc

// Copyright 2026  The ctc-curriculum Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "curriculum/dataset.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

namespace curriculum {

namespace {

constexpr const char* kFormat = "ctc-curriculum-corpus";
constexpr int kVersion = 1;

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                bytes.data(), static_cast<int>(bytes.size()));
  out.resize(n);
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0)
    throw std::invalid_argument("base64 length is not a multiple of 4");
  std::vector<unsigned char> out(text.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw std::invalid_argument("bad base64 data");
  // EVP_DecodeBlock keeps the bytes hidden behind '=' padding.
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

template <typename T>
void append_le(std::vector<unsigned char>& bytes, T value) {
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(raw, raw + sizeof(T));
  bytes.insert(bytes.end(), raw, raw + sizeof(T));
}

template <typename T>
T read_le(const unsigned char* src) {
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, src, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(raw, raw + sizeof(T));
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

bool float_exact(const RowMatrix& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const double x = m.data()[k];
    if (static_cast<double>(static_cast<float>(x)) != x) return false;
  }
  return true;
}

nlohmann::json encode_frames(const RowMatrix& frames) {
  const bool f32 = float_exact(frames);
  std::vector<unsigned char> bytes;
  bytes.reserve(frames.size() * (f32 ? 4 : 8));
  for (Eigen::Index k = 0; k < frames.size(); ++k) {
    if (f32)
      append_le(bytes, static_cast<float>(frames.data()[k]));
    else
      append_le(bytes, frames.data()[k]);
  }
  return {{"shape", {frames.rows(), frames.cols()}},
          {"dtype", f32 ? "f32le" : "f64le"},
          {"data", base64_encode(bytes)}};
}

RowMatrix decode_frames(const nlohmann::json& j, int input_dim) {
  const auto shape = j.at("shape").get<std::vector<std::int64_t>>();
  if (shape.size() != 2 || shape[0] < 0 || shape[1] != input_dim)
    throw std::invalid_argument("frames shape must be [T, input_dim]");
  const std::string dtype = j.at("dtype").get<std::string>();
  const std::size_t width = dtype == "f32le" ? 4 : dtype == "f64le" ? 8 : 0;
  if (width == 0) throw std::invalid_argument("unknown frames dtype " + dtype);
  const auto bytes = base64_decode(j.at("data").get<std::string>());
  const std::size_t count = static_cast<std::size_t>(shape[0] * shape[1]);
  if (bytes.size() != count * width)
    throw std::invalid_argument("frames data does not match declared shape");
  RowMatrix frames(shape[0], shape[1]);
  for (std::size_t k = 0; k < count; ++k)
    frames.data()[k] = width == 4 ? read_le<float>(&bytes[k * 4])
                                  : read_le<double>(&bytes[k * 8]);
  return frames;
}

// Word lengths summing to `len`, each within [lo, hi], with single spaces
// between consecutive words.
std::vector<int> draw_word_lengths(int len, int lo, int hi, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> word_len(lo, hi);
  std::vector<int> words;
  int remaining = len;
  while (remaining > 0) {
    int w = std::min(word_len(rng), remaining);
    // Never leave a single slot: it could only hold a trailing space.
    if (remaining - w == 1) w = w > lo ? w - 1 : std::min(w + 1, remaining);
    words.push_back(w);
    remaining -= w;
    if (remaining > 0) --remaining;  // separator
  }
  return words;
}

Sample render_line(std::int64_t id, const CorpusSpec& spec,
                   const RowMatrix& templates, std::mt19937_64& rng) {
  std::bernoulli_distribution is_short(spec.short_line_prob);
  std::uniform_int_distribution<int> short_len(spec.short_min, spec.short_max);
  std::uniform_int_distribution<int> long_len(spec.long_min, spec.long_max);
  std::uniform_int_distribution<int> char_label(0, spec.alphabet_size - 2);
  std::uniform_int_distribution<int> char_frames(spec.frames_min,
                                                 spec.frames_max);
  std::normal_distribution<double> noise(0.0, 1.0);

  const int len = is_short(rng) ? short_len(rng) : long_len(rng);
  const auto word_lengths =
      draw_word_lengths(len, spec.word_min, spec.word_max, rng);
  const int space = spec.alphabet_size - 1;

  Sample s;
  s.id = id;
  std::vector<int> widths;
  for (std::size_t w = 0; w < word_lengths.size(); ++w) {
    if (w > 0) s.target.push_back(space);
    for (int k = 0; k < word_lengths[w]; ++k) s.target.push_back(char_label(rng));
  }
  widths.reserve(s.target.size());
  int total_frames = 0;
  for (std::size_t k = 0; k < s.target.size(); ++k) {
    widths.push_back(char_frames(rng));
    total_frames += widths.back();
  }

  s.frames.resize(total_frames, spec.input_dim);
  std::vector<int> starts(s.target.size() + 1, 0);
  int frame = 0;
  for (std::size_t k = 0; k < s.target.size(); ++k) {
    starts[k] = frame;
    for (int f = 0; f < widths[k]; ++f, ++frame) {
      for (int d = 0; d < spec.input_dim; ++d) {
        const double x = templates(s.target[k], d) + spec.noise_sigma * noise(rng);
        s.frames(frame, d) = static_cast<float>(x);
      }
    }
  }
  starts[s.target.size()] = frame;

  int label = 0;
  for (int w : word_lengths) {
    s.words.push_back({label, label + w, starts[label], starts[label + w]});
    label += w + 1;
  }
  return s;
}

}  // namespace

bool operator==(const Sample& a, const Sample& b) {
  return a.id == b.id && a.target == b.target && a.words == b.words &&
         a.frames.rows() == b.frames.rows() &&
         a.frames.cols() == b.frames.cols() &&
         std::memcmp(a.frames.data(), b.frames.data(),
                     sizeof(double) * a.frames.size()) == 0;
}

std::uint64_t Corpus::total_target_chars() const {
  std::uint64_t total = 0;
  for (const auto& s : samples) total += s.target.size();
  return total;
}

void CorpusSpec::validate() const {
  if (alphabet_size < 2)
    throw std::invalid_argument("corpus: alphabet_size must be >= 2");
  if (input_dim < 1 || n_train < 0 || n_valid < 0)
    throw std::invalid_argument("corpus: bad sizes");
  if (short_min < 1 || short_max < short_min || long_min < 1 ||
      long_max < long_min || word_min < 1 || word_max < word_min + 1)
    throw std::invalid_argument("corpus: bad length law");
  if (frames_min < 1 || frames_max < frames_min)
    throw std::invalid_argument("corpus: bad frames per character");
  if (!(noise_sigma >= 0.0) || !(short_line_prob >= 0.0 && short_line_prob <= 1.0))
    throw std::invalid_argument("corpus: bad noise or mixture weight");
}

double CorpusSpec::mean_line_length() const {
  return short_line_prob * 0.5 * (short_min + short_max) +
         (1.0 - short_line_prob) * 0.5 * (long_min + long_max);
}

SplitCorpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  // Independent streams so the valid split does not depend on n_train.
  std::seed_seq template_seq{spec.seed, std::uint64_t{0}};
  std::seed_seq train_seq{spec.seed, std::uint64_t{1}};
  std::seed_seq valid_seq{spec.seed, std::uint64_t{2}};
  std::mt19937_64 template_rng(template_seq);
  std::mt19937_64 train_rng(train_seq);
  std::mt19937_64 valid_rng(valid_seq);

  std::normal_distribution<double> unit(0.0, 1.0);
  RowMatrix templates(spec.alphabet_size, spec.input_dim);
  for (Eigen::Index k = 0; k < templates.size(); ++k)
    templates.data()[k] = unit(template_rng);

  SplitCorpus out;
  for (Corpus* c : {&out.train, &out.valid}) {
    c->alphabet_size = spec.alphabet_size;
    c->input_dim = spec.input_dim;
  }
  out.train.samples.reserve(spec.n_train);
  for (int i = 0; i < spec.n_train; ++i)
    out.train.samples.push_back(render_line(i, spec, templates, train_rng));
  out.valid.samples.reserve(spec.n_valid);
  for (int i = 0; i < spec.n_valid; ++i)
    out.valid.samples.push_back(
        render_line(spec.n_train + i, spec, templates, valid_rng));
  return out;
}

void validate_words(const Sample& s, int space_label) {
  const int L = static_cast<int>(s.target.size());
  const int T = static_cast<int>(s.frames.rows());
  std::vector<bool> covered(L, false);
  int prev_label_end = 0;
  int prev_frame_end = 0;
  for (const auto& w : s.words) {
    if (w.label_begin < prev_label_end || w.label_end <= w.label_begin ||
        w.label_end > L)
      throw std::invalid_argument("word label spans overlap or leave the line");
    if (w.frame_begin < prev_frame_end || w.frame_end <= w.frame_begin ||
        w.frame_end > T)
      throw std::invalid_argument("word frame spans overlap or leave the line");
    for (int k = w.label_begin; k < w.label_end; ++k) covered[k] = true;
    prev_label_end = w.label_end;
    prev_frame_end = w.frame_end;
  }
  for (int k = 0; k < L; ++k)
    if (!covered[k] && s.target[k] != space_label)
      throw std::invalid_argument("label outside every word is not a space");
}

Corpus split_into_words(const Corpus& lines) {
  Corpus words;
  words.alphabet_size = lines.alphabet_size;
  words.input_dim = lines.input_dim;
  std::int64_t next_id = 0;
  for (const auto& line : lines.samples) {
    if (line.words.empty() && !line.target.empty())
      throw std::invalid_argument("sample " + std::to_string(line.id) +
                                  " has no word boundaries");
    validate_words(line, lines.space_label());
    for (const auto& w : line.words) {
      Sample s;
      s.id = next_id++;
      s.frames = line.frames.middleRows(w.frame_begin, w.frame_end - w.frame_begin);
      s.target.assign(line.target.begin() + w.label_begin,
                      line.target.begin() + w.label_end);
      s.words.push_back({0, w.label_end - w.label_begin, 0,
                         w.frame_end - w.frame_begin});
      words.samples.push_back(std::move(s));
    }
  }
  return words;
}

CorpusFormatError::CorpusFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("corpus record at line " + std::to_string(line) +
                         ": " + what),
      line_(line) {}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus " + path);
  const nlohmann::json header = {{"format", kFormat},
                                 {"version", kVersion},
                                 {"alphabet_size", corpus.alphabet_size},
                                 {"input_dim", corpus.input_dim},
                                 {"records", corpus.samples.size()}};
  out << header.dump() << '\n';
  for (const auto& s : corpus.samples) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& w : s.words)
      words.push_back({w.label_begin, w.label_end, w.frame_begin, w.frame_end});
    const nlohmann::json rec = {{"id", s.id},
                                {"target", s.target},
                                {"frames", encode_frames(s.frames)},
                                {"word_boundaries", words}};
    out << rec.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing corpus " + path);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus " + path);
  Corpus corpus;
  std::string text;
  std::size_t line_no = 0;
  std::size_t declared = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw CorpusFormatError(line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        if (j.value("format", "") != kFormat || j.value("version", 0) != kVersion)
          throw std::invalid_argument("missing or unsupported header");
        corpus.alphabet_size = j.at("alphabet_size").get<int>();
        corpus.input_dim = j.at("input_dim").get<int>();
        declared = j.at("records").get<std::size_t>();
        if (corpus.alphabet_size < 2 || corpus.input_dim < 1)
          throw std::invalid_argument("bad alphabet_size or input_dim");
        have_header = true;
        continue;
      }
      Sample s;
      s.id = j.at("id").get<std::int64_t>();
      s.target = j.at("target").get<LabelSequence>();
      for (int y : s.target)
        if (y < 0 || y >= corpus.alphabet_size)
          throw std::invalid_argument("label " + std::to_string(y) +
                                      " out of range");
      s.frames = decode_frames(j.at("frames"), corpus.input_dim);
      for (const auto& w : j.at("word_boundaries")) {
        const auto v = w.get<std::vector<int>>();
        if (v.size() != 4)
          throw std::invalid_argument("word boundary needs 4 integers");
        s.words.push_back({v[0], v[1], v[2], v[3]});
      }
      validate_words(s, corpus.space_label());
      corpus.samples.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw CorpusFormatError(line_no, e.what());
    } catch (const std::invalid_argument& e) {
      throw CorpusFormatError(line_no, e.what());
    }
  }
  if (!have_header) {
    spdlog::warn("corpus file {} is empty", path);
    return corpus;
  }
  if (corpus.samples.size() != declared)
    throw CorpusFormatError(line_no + 1,
                            "expected record " +
                                std::to_string(corpus.samples.size() + 1) +
                                " of " + std::to_string(declared) +
                                "; file is truncated");
  return corpus;
}

}  // namespace curriculum
