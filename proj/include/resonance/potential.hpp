#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace resonance {

using Complex = std::complex<double>;

struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
  bool operator==(const Segment&) const = default;
};

struct Delta {
  double x = 0.0;
  double alpha = 0.0;
  bool operator==(const Delta&) const = default;
};

// A constant stretch between consecutive breakpoints of a potential.
// Pieces tile [support().first, support().second] without gaps.
struct Piece {
  double lo;
  double hi;
  double value;
};

// V(x) = sum of constant segments + sum of alpha_i delta(x - x_i).
// Immutable once built; the constructor validates ordering and finiteness.
class Potential {
 public:
  Potential() = default;
  Potential(std::vector<Segment> segments, std::vector<Delta> deltas, std::string label = {});

  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Delta>& deltas() const { return deltas_; }
  const std::string& label() const { return label_; }

  bool empty() const { return segments_.empty() && deltas_.empty(); }
  // [inf supp V, sup supp V]; nullopt for the zero potential.
  std::optional<std::pair<double, double>> support() const;
  const std::vector<Piece>& pieces() const { return pieces_; }

  // ||V||_1 counting delta strengths, and max |v| over segments.
  double l1_norm() const;
  double sup_segment() const;

  bool operator==(const Potential& o) const {
    return segments_ == o.segments_ && deltas_ == o.deltas_;
  }

  nlohmann::json to_json() const;

 private:
  friend Potential translate(const Potential&, double);
  void build();

  // Positions are stored relative to an accumulated offset so that a translation
  // followed by its inverse reproduces the original positions bit for bit.
  std::vector<Segment> base_segments_;
  std::vector<Delta> base_deltas_;
  double offset_ = 0.0;
  std::vector<Segment> segments_;
  std::vector<Delta> deltas_;
  std::string label_;
  std::vector<Piece> pieces_;
};

Potential potential_from_json(const nlohmann::json& doc);
Potential parse_potential(std::string_view text);

Potential translate(const Potential& v, double shift);
Potential scale(const Potential& v, double mu);
// Sum of two potentials with disjoint supports (touching endpoints allowed).
Potential combine(const Potential& a, const Potential& b, std::string label = {});

// V^(q) = integral V(x) e^{-iqx} dx.
Complex fourier_transform(const Potential& v, Complex q);

}  // namespace resonance
