#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagspot/layout.hpp"

namespace tagspot {

/// A binary codeword of at most 64 bits. Bit string position i (0 = leftmost)
/// lives at bit (length - 1 - i), so numeric order equals lexicographic order
/// of the bit strings.
using Codeword = std::uint64_t;

Codeword parse_bit_string(std::string_view bits);
std::string to_bit_string(Codeword word, int length);
int hamming_distance(Codeword a, Codeword b);

/// A validated family of fixed-length codewords, stored in canonical
/// (ascending) order. Codeword indices refer to that order.
class Codebook {
 public:
  /// Validates lengths, uniqueness and the declared minimum distance.
  Codebook(std::string name, int word_length, int declared_min_distance,
           std::vector<Codeword> words);

  const std::string& name() const { return name_; }
  int word_length() const { return word_length_; }
  int declared_min_distance() const { return declared_min_distance_; }
  std::span<const Codeword> words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  Codeword operator[](std::size_t i) const { return words_[i]; }

  /// First `count` words, renamed. Used to build nested sub-families.
  Codebook prefix(std::size_t count) const;

 private:
  std::string name_;
  int word_length_;
  int declared_min_distance_;
  std::vector<Codeword> words_;
};

/// Exact minimum pairwise Hamming distance (brute force). Needs >= 2 words.
int verify_min_distance(std::span<const Codeword> words);

/// Parses the text format:
///
///     # comment
///     name: sloane-seidel-28-60-13
///     word_length: 28
///     min_distance: 13
///     0110...
///
/// Errors carry the 1-based line numbers of offending words.
Codebook load_codebook(std::istream& in);
Codebook load_codebook_file(const std::filesystem::path& path);

/// Canonical serialization: header then words in ascending order.
std::string serialize(const Codebook& book);

/// Selects, for each group, the first (bit 0) or second (bit 1) carrier.
WideCarrierMask codeword_to_mask(Codeword word, int word_length, const CarrierLayout& layout);

/// Masks for every word of `book`, in codeword-index order.
std::vector<WideCarrierMask> codebook_masks(const Codebook& book, const CarrierLayout& layout);

/// Randomised greedy family with verified distance >= target_distance.
/// Each accepted candidate is followed by a try of its complement, which is
/// what makes the distance == word_length case reach size 2.
Codebook generate_fallback_family(int word_length, int target_distance, std::uint64_t seed,
                                  std::size_t max_size = 60,
                                  std::size_t max_attempts = 200000);

/// Nonlinear code built from the Paley conference matrix of order q + 1
/// (q prime, q = 1 mod 4): the rows of C + I and -C + I mapped to binary,
/// with the first `puncture` coordinates deleted. q = 29, puncture = 2 gives
/// the (28, 60, 13) family shipped in data/codebooks.
Codebook conference_matrix_code(int q, int puncture);

}  // namespace tagspot
