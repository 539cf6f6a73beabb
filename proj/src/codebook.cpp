#include "tagspot/codebook.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <sstream>

#include "tagspot/error.hpp"

namespace tagspot {

namespace {

constexpr int kMaxWordLength = 64;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

int parse_int(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw ValidationError("codebook: " + key + " is not an integer: '" + value + "'");
  }
  return out;
}

Codeword low_mask(int length) {
  return length >= kMaxWordLength ? ~Codeword{0} : (Codeword{1} << length) - 1;
}

}  // namespace

Codeword parse_bit_string(std::string_view bits) {
  if (bits.empty() || bits.size() > kMaxWordLength) {
    throw ValidationError("bit string must have 1..64 characters");
  }
  Codeword word = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw ValidationError("bit string contains '" + std::string(1, c) + "'");
    }
    word = (word << 1) | static_cast<Codeword>(c == '1');
  }
  return word;
}

std::string to_bit_string(Codeword word, int length) {
  std::string out(static_cast<std::size_t>(length), '0');
  for (int i = 0; i < length; ++i) {
    if ((word >> (length - 1 - i)) & 1U) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

int hamming_distance(Codeword a, Codeword b) { return std::popcount(a ^ b); }

Codebook::Codebook(std::string name, int word_length, int declared_min_distance,
                   std::vector<Codeword> words)
    : name_(std::move(name)),
      word_length_(word_length),
      declared_min_distance_(declared_min_distance),
      words_(std::move(words)) {
  if (word_length_ < 1 || word_length_ > kMaxWordLength) {
    throw ValidationError("codebook: word_length must be in 1..64");
  }
  if (declared_min_distance_ < 0 || declared_min_distance_ > word_length_) {
    throw ValidationError("codebook: min_distance must be in 0..word_length");
  }
  if (words_.empty()) throw ValidationError("codebook: no words");
  const Codeword outside = ~low_mask(word_length_);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & outside) {
      throw ValidationError("codebook: word " + std::to_string(i) + " exceeds word_length");
    }
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    for (std::size_t j = i + 1; j < words_.size(); ++j) {
      const int d = hamming_distance(words_[i], words_[j]);
      if (d == 0) {
        throw ValidationError("codebook: duplicate words " + std::to_string(i) + " and " +
                              std::to_string(j));
      }
      if (d < declared_min_distance_) {
        throw ValidationError("codebook: distance violation between words " + std::to_string(i) +
                              " and " + std::to_string(j) + " (distance " + std::to_string(d) +
                              " < " + std::to_string(declared_min_distance_) + ")");
      }
    }
  }
  std::sort(words_.begin(), words_.end());
}

Codebook Codebook::prefix(std::size_t count) const {
  if (count == 0 || count > words_.size()) {
    throw ValidationError("codebook: prefix size out of range");
  }
  std::vector<Codeword> head(words_.begin(), words_.begin() + static_cast<std::ptrdiff_t>(count));
  return Codebook(name_ + "[:" + std::to_string(count) + "]", word_length_,
                  declared_min_distance_, std::move(head));
}

int verify_min_distance(std::span<const Codeword> words) {
  if (words.size() < 2) throw ValidationError("verify_min_distance: need at least two words");
  int best = kMaxWordLength + 1;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      best = std::min(best, hamming_distance(words[i], words[j]));
    }
  }
  return best;
}

Codebook load_codebook(std::istream& in) {
  std::map<std::string, std::string> header;
  std::vector<Codeword> words;
  std::vector<int> lines;
  std::vector<std::size_t> lengths;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (const auto colon = line.find(':'); colon != std::string::npos) {
      if (!words.empty()) {
        throw ValidationError("codebook: header field after words at line " +
                              std::to_string(line_no));
      }
      header[trim(std::string_view(line).substr(0, colon))] =
          trim(std::string_view(line).substr(colon + 1));
      continue;
    }
    words.push_back(parse_bit_string(line));
    lines.push_back(line_no);
    lengths.push_back(line.size());
  }
  if (in.bad()) throw IoError("codebook: read failure");

  for (const char* key : {"name", "word_length", "min_distance"}) {
    if (!header.contains(key)) throw ValidationError(std::string("codebook: missing ") + key);
  }
  const int length = parse_int(header["word_length"], "word_length");
  const int distance = parse_int(header["min_distance"], "min_distance");

  for (std::size_t i = 0; i < words.size(); ++i) {
    if (static_cast<int>(lengths[i]) != length) {
      throw ValidationError("codebook: wrong word length at line " + std::to_string(lines[i]) +
                            " (word " + std::to_string(i) + ")");
    }
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      const int d = hamming_distance(words[i], words[j]);
      if (d == 0) {
        throw ValidationError("codebook: duplicate word at lines " + std::to_string(lines[i]) +
                              " and " + std::to_string(lines[j]));
      }
      if (d < distance) {
        throw ValidationError("codebook: distance violation between words " + std::to_string(i) +
                              " and " + std::to_string(j) + " (lines " +
                              std::to_string(lines[i]) + ", " + std::to_string(lines[j]) +
                              "): distance " + std::to_string(d) + " < " +
                              std::to_string(distance));
      }
    }
  }
  return Codebook(header["name"], length, distance, std::move(words));
}

Codebook load_codebook_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open codebook " + path.string());
  return load_codebook(in);
}

std::string serialize(const Codebook& book) {
  std::ostringstream out;
  out << "name: " << book.name() << '\n'
      << "word_length: " << book.word_length() << '\n'
      << "min_distance: " << book.declared_min_distance() << '\n';
  for (Codeword w : book.words()) out << to_bit_string(w, book.word_length()) << '\n';
  return out.str();
}

WideCarrierMask codeword_to_mask(Codeword word, int word_length, const CarrierLayout& layout) {
  if (word_length != layout.groups) {
    throw ValidationError("codeword_to_mask: word length " + std::to_string(word_length) +
                          " != groups " + std::to_string(layout.groups));
  }
  const auto pairs = layout.group_map();
  WideCarrierMask mask;
  mask.active.reserve(pairs.size());
  for (int g = 0; g < word_length; ++g) {
    const bool bit = (word >> (word_length - 1 - g)) & 1U;
    mask.active.push_back(pairs[static_cast<std::size_t>(g)][bit ? 1 : 0]);
  }
  std::sort(mask.active.begin(), mask.active.end());
  return mask;
}

std::vector<WideCarrierMask> codebook_masks(const Codebook& book, const CarrierLayout& layout) {
  std::vector<WideCarrierMask> masks;
  masks.reserve(book.size());
  for (Codeword w : book.words()) masks.push_back(codeword_to_mask(w, book.word_length(), layout));
  return masks;
}

Codebook generate_fallback_family(int word_length, int target_distance, std::uint64_t seed,
                                  std::size_t max_size, std::size_t max_attempts) {
  if (word_length < 1 || word_length > kMaxWordLength) {
    throw ValidationError("fallback family: word_length must be in 1..64");
  }
  if (target_distance < 1 || target_distance > word_length) {
    throw ValidationError("fallback family: need 1 <= target_distance <= word_length");
  }
  if (word_length < kMaxWordLength) {
    max_size = std::min<std::size_t>(max_size, std::size_t{1} << word_length);
  }
  const Codeword mask = low_mask(word_length);
  std::mt19937_64 rng(seed);
  std::vector<Codeword> family;
  const auto admissible = [&](Codeword c) {
    return std::all_of(family.begin(), family.end(),
                       [&](Codeword w) { return hamming_distance(w, c) >= target_distance; });
  };
  for (std::size_t attempt = 0; attempt < max_attempts && family.size() < max_size; ++attempt) {
    const Codeword candidate = rng() & mask;
    if (!admissible(candidate)) continue;
    family.push_back(candidate);
    const Codeword complement = ~candidate & mask;
    if (family.size() < max_size && admissible(complement)) family.push_back(complement);
  }
  const int achieved = family.size() >= 2 ? verify_min_distance(family) : word_length;
  std::string name = "greedy-" + std::to_string(word_length) + "-" +
                     std::to_string(family.size()) + "-" + std::to_string(achieved);
  return Codebook(std::move(name), word_length, target_distance, std::move(family));
}

Codebook conference_matrix_code(int q, int puncture) {
  if (q < 5 || q % 4 != 1) throw ValidationError("conference code: need q = 1 mod 4, q >= 5");
  for (int d = 2; d * d <= q; ++d) {
    if (q % d == 0) throw ValidationError("conference code: q must be prime");
  }
  const int n = q + 1;
  if (puncture < 0 || n - puncture < 1 || n - puncture > kMaxWordLength) {
    throw ValidationError("conference code: bad puncture count");
  }
  std::vector<int> residue(static_cast<std::size_t>(q), -1);
  residue[0] = 0;
  for (int x = 1; x < q; ++x) residue[static_cast<std::size_t>((x * x) % q)] = 1;

  // Paley conference matrix: zero diagonal, first row/column all ones, the
  // quadratic character of (j - i) elsewhere.
  const auto entry = [&](int i, int j) -> int {
    if (i == j) return 0;
    if (i == 0 || j == 0) return 1;
    return residue[static_cast<std::size_t>(((j - i) % q + q) % q)];
  };

  std::vector<Codeword> words;
  words.reserve(static_cast<std::size_t>(2 * n));
  for (int sign : {1, -1}) {
    for (int i = 0; i < n; ++i) {
      Codeword w = 0;
      for (int j = puncture; j < n; ++j) {
        const int value = i == j ? 1 : sign * entry(i, j);
        w = (w << 1) | static_cast<Codeword>(value < 0);
      }
      words.push_back(w);
    }
  }
  const int distance = verify_min_distance(words);
  const int length = n - puncture;
  std::string name = "sloane-seidel-" + std::to_string(length) + "-" +
                     std::to_string(words.size()) + "-" + std::to_string(distance);
  return Codebook(std::move(name), length, distance, std::move(words));
}

}  // namespace tagspot
