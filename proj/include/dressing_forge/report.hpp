#ifndef DRESSING_FORGE_REPORT_HPP
#define DRESSING_FORGE_REPORT_HPP

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dressing_forge {

/// One named residual compared against its tolerance.
struct CheckRecord {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  /// Set when the check could not run (e.g. Lagrangian check at non-real lambda).
  bool skipped = false;
  std::string status;
  std::map<std::string, std::string> metadata;
};

class VerificationReport {
 public:
  CheckRecord& add(std::string name, double residual, double tolerance) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.residual = residual;
    rec.tolerance = tolerance;
    rec.pass = residual < tolerance;
    records_.push_back(std::move(rec));
    return records_.back();
  }

  CheckRecord& skip(std::string name, std::string why) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.skipped = true;
    rec.pass = true;
    rec.status = std::move(why);
    records_.push_back(std::move(rec));
    return records_.back();
  }

  CheckRecord& append(CheckRecord rec) {
    records_.push_back(std::move(rec));
    return records_.back();
  }

  void merge(const VerificationReport& other) {
    records_.insert(records_.end(), other.records_.begin(), other.records_.end());
  }

  const std::vector<CheckRecord>& records() const noexcept { return records_; }

  bool all_pass() const {
    return std::all_of(records_.begin(), records_.end(), [](const CheckRecord& r) { return r.pass; });
  }

  const CheckRecord* find(const std::string& name) const {
    for (const auto& r : records_)
      if (r.name == name) return &r;
    return nullptr;
  }

  /// Residual of the named check; throws std::out_of_range when absent.
  double residual(const std::string& name) const {
    const auto* r = find(name);
    if (r == nullptr) throw std::out_of_range("no check named " + name);
    return r->residual;
  }

 private:
  std::vector<CheckRecord> records_;
};

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_REPORT_HPP
