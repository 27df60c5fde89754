#ifndef AEDS_REPORT_HPP
#define AEDS_REPORT_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aeds {

enum class FamilyKind {
  MaxAbs,      // value is a max |residual|; pass means "vanishes"
  LowerBound,  // value is a min |quantity|; pass means "bounded away from zero"
};

struct Family {
  std::string name;
  double value = 0.0;
  bool pass = true;
  FamilyKind kind = FamilyKind::MaxAbs;
  /// Informational families are reported but do not enter the verdict.
  bool informational = false;
  std::vector<std::pair<std::string, double>> worst_point;
  std::string detail;
};

struct Report {
  std::string title;
  std::vector<Family> families;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, std::string>> notes;

  bool pass() const noexcept {
    for (const auto& f : families) {
      if (!f.informational && !f.pass) return false;
    }
    return true;
  }
  const Family* find(std::string_view name) const noexcept {
    for (const auto& f : families) {
      if (f.name == name) return &f;
    }
    return nullptr;
  }
  double value(std::string_view name) const {
    for (const auto& f : families) {
      if (f.name == name) return f.value;
    }
    return 0.0;
  }
  const Family& add(Family f) {
    families.push_back(std::move(f));
    return families.back();
  }
  void note(std::string key, std::string text) { notes.emplace_back(std::move(key), std::move(text)); }
  void metric(std::string key, double v) { metrics.emplace_back(std::move(key), v); }
};

}  // namespace aeds

#endif  // AEDS_REPORT_HPP
