#include "resonance/potential.hpp"

#include <algorithm>
#include <cmath>

#include "resonance/errors.hpp"

namespace resonance {

namespace {

void require_finite(double x, const std::string& field) {
  if (!std::isfinite(x)) throw ValidationError(field, "non-finite number");
}

std::string idx(const char* list, std::size_t i, const char* key) {
  return std::string(list) + "[" + std::to_string(i) + "]." + key;
}

// Walks the document only to learn where a number overflowed; the DOM parser
// reports the position but not the path.
struct PathTracker : nlohmann::json_sax<nlohmann::json> {
  struct Level {
    bool array;
    std::size_t index = 0;
    std::string key;
  };
  std::vector<Level> stack;
  std::string failed_at;

  std::string path() const {
    std::string out;
    for (const auto& l : stack) {
      if (l.array) {
        if (l.index > 0) out += "[" + std::to_string(l.index - 1) + "]";
      } else if (!l.key.empty()) {
        out += (out.empty() ? "" : ".") + l.key;
      }
    }
    return out.empty() ? "<root>" : out;
  }
  bool value() {
    if (!stack.empty() && stack.back().array) ++stack.back().index;
    return true;
  }
  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override {
    value();
    stack.push_back({false, 0, {}});
    return true;
  }
  bool key(string_t& k) override {
    stack.back().key = k;
    return true;
  }
  bool end_object() override {
    stack.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    value();
    stack.push_back({true, 0, {}});
    return true;
  }
  bool end_array() override {
    stack.pop_back();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    // The failing scalar has not been counted yet.
    if (!stack.empty() && stack.back().array) ++stack.back().index;
    failed_at = path();
    return false;
  }
};

}  // namespace

Potential::Potential(std::vector<Segment> segments, std::vector<Delta> deltas, std::string label)
    : base_segments_(std::move(segments)), base_deltas_(std::move(deltas)), label_(std::move(label)) {
  build();
}

void Potential::build() {
  segments_ = base_segments_;
  deltas_ = base_deltas_;
  for (auto& s : segments_) {
    s.lo += offset_;
    s.hi += offset_;
  }
  for (auto& d : deltas_) d.x += offset_;
  pieces_.clear();
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    require_finite(s.lo, idx("segments", i, "lo"));
    require_finite(s.hi, idx("segments", i, "hi"));
    require_finite(s.value, idx("segments", i, "v"));
    if (!(s.lo < s.hi)) throw ValidationError(idx("segments", i, "hi"), "empty or reversed segment");
    if (i > 0) {
      const auto& p = segments_[i - 1];
      if (s.lo < p.lo) throw ValidationError(idx("segments", i, "lo"), "segments not sorted");
      if (s.lo < p.hi) throw ValidationError(idx("segments", i, "lo"), "overlapping segments");
    }
  }
  for (std::size_t i = 0; i < deltas_.size(); ++i) {
    require_finite(deltas_[i].x, idx("deltas", i, "x"));
    require_finite(deltas_[i].alpha, idx("deltas", i, "alpha"));
    if (i > 0) {
      if (deltas_[i].x == deltas_[i - 1].x)
        throw ValidationError(idx("deltas", i, "x"), "duplicate delta position");
      if (deltas_[i].x < deltas_[i - 1].x)
        throw ValidationError(idx("deltas", i, "x"), "deltas not sorted");
    }
  }

  std::vector<double> cuts;
  for (const auto& s : segments_) {
    cuts.push_back(s.lo);
    cuts.push_back(s.hi);
  }
  for (const auto& d : deltas_) cuts.push_back(d.x);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::size_t seg = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    while (seg < segments_.size() && segments_[seg].hi <= lo) ++seg;
    double v = (seg < segments_.size() && segments_[seg].lo <= lo) ? segments_[seg].value : 0.0;
    pieces_.push_back({lo, hi, v});
  }
}

std::optional<std::pair<double, double>> Potential::support() const {
  if (empty()) return std::nullopt;
  double lo = INFINITY, hi = -INFINITY;
  if (!segments_.empty()) {
    lo = segments_.front().lo;
    hi = segments_.back().hi;
  }
  if (!deltas_.empty()) {
    lo = std::min(lo, deltas_.front().x);
    hi = std::max(hi, deltas_.back().x);
  }
  return std::pair{lo, hi};
}

double Potential::l1_norm() const {
  double s = 0.0;
  for (const auto& seg : segments_) s += std::abs(seg.value) * (seg.hi - seg.lo);
  for (const auto& d : deltas_) s += std::abs(d.alpha);
  return s;
}

double Potential::sup_segment() const {
  double s = 0.0;
  for (const auto& seg : segments_) s = std::max(s, std::abs(seg.value));
  return s;
}

nlohmann::json Potential::to_json() const {
  nlohmann::json j;
  if (!label_.empty()) j["label"] = label_;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : segments_) j["segments"].push_back({{"lo", s.lo}, {"hi", s.hi}, {"v", s.value}});
  j["deltas"] = nlohmann::json::array();
  for (const auto& d : deltas_) j["deltas"].push_back({{"x", d.x}, {"alpha", d.alpha}});
  return j;
}

namespace {

double read_number(const nlohmann::json& obj, const char* key, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(field, "missing");
  const auto& v = obj.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_array() || v.is_object())
    throw ValidationError(field, "complex or structured value; a real number is required");
  throw ValidationError(field, "not a number");
}

}  // namespace

Potential potential_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("<root>", "expected a JSON object");
  std::vector<Segment> segs;
  std::vector<Delta> dels;
  std::string label;
  if (doc.contains("label")) {
    if (!doc["label"].is_string()) throw ValidationError("label", "expected a string");
    label = doc["label"].get<std::string>();
  }
  if (doc.contains("segments")) {
    const auto& arr = doc["segments"];
    if (!arr.is_array()) throw ValidationError("segments", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      segs.push_back({read_number(arr[i], "lo", idx("segments", i, "lo")),
                      read_number(arr[i], "hi", idx("segments", i, "hi")),
                      read_number(arr[i], "v", idx("segments", i, "v"))});
  }
  if (doc.contains("deltas")) {
    const auto& arr = doc["deltas"];
    if (!arr.is_array()) throw ValidationError("deltas", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      dels.push_back({read_number(arr[i], "x", idx("deltas", i, "x")),
                      read_number(arr[i], "alpha", idx("deltas", i, "alpha"))});
  }
  return Potential(std::move(segs), std::move(dels), std::move(label));
}

Potential parse_potential(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("<root>", e.what());
  } catch (const nlohmann::json::out_of_range& e) {
    PathTracker t;
    nlohmann::json::sax_parse(text, &t);
    throw ValidationError(t.failed_at, e.what());
  }
  return potential_from_json(doc);
}

Potential translate(const Potential& v, double shift) {
  Potential out = v;
  out.offset_ += shift;
  out.build();
  return out;
}

Potential scale(const Potential& v, double mu) {
  if (mu == 0.0) return Potential({}, {}, v.label());
  auto segs = v.segments();
  auto dels = v.deltas();
  for (auto& s : segs) s.value *= mu;
  for (auto& d : dels) d.alpha *= mu;
  return Potential(std::move(segs), std::move(dels), v.label());
}

Potential combine(const Potential& a, const Potential& b, std::string label) {
  std::vector<Segment> segs = a.segments();
  segs.insert(segs.end(), b.segments().begin(), b.segments().end());
  std::vector<Delta> dels = a.deltas();
  dels.insert(dels.end(), b.deltas().begin(), b.deltas().end());
  std::stable_sort(segs.begin(), segs.end(), [](auto& l, auto& r) { return l.lo < r.lo; });
  std::stable_sort(dels.begin(), dels.end(), [](auto& l, auto& r) { return l.x < r.x; });
  return Potential(std::move(segs), std::move(dels), std::move(label));
}

Complex fourier_transform(const Potential& v, Complex q) {
  const Complex I(0.0, 1.0);
  Complex sum = 0.0;
  for (const auto& d : v.deltas()) sum += d.alpha * std::exp(-I * q * d.x);
  for (const auto& s : v.segments()) {
    double width = s.hi - s.lo;
    Complex z = -I * q * width;
    // (e^{-iq lo} - e^{-iq hi})/(iq) = width e^{-iq lo} (1 - e^{z})/(-z)
    Complex ratio;
    if (std::abs(z) < 1e-3) {
      ratio = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
    } else {
      ratio = (std::exp(z) - 1.0) / z;
    }
    sum += s.value * width * std::exp(-I * q * s.lo) * ratio;
  }
  return sum;
}

}  // namespace resonance
