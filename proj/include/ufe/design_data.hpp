#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ufe/errors.hpp"

namespace ufe::design {

enum class DesignKind { Single, Two };
enum class Factor { A, B };

// Observations of a single-factor experiment: obs[i] holds the replicates of
// level i in input order. Weights are the exact rationals m_i / N.
class SingleFactorData {
  public:
    SingleFactorData(std::vector<std::vector<double>> obs, std::vector<std::string> labels = {});

    std::size_t levels() const { return obs_.size(); }
    std::size_t replicates(std::size_t i) const { return obs_[i].size(); }
    std::size_t total() const { return total_; }
    double weight(std::size_t i) const {
        return static_cast<double>(obs_[i].size()) / static_cast<double>(total_);
    }
    const std::vector<double>& row(std::size_t i) const { return obs_[i]; }
    const std::vector<std::vector<double>>& rows() const { return obs_; }
    const std::string& label(std::size_t i) const { return labels_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }

  private:
    std::vector<std::vector<double>> obs_;
    std::vector<std::string> labels_;
    std::size_t total_ = 0;
};

// Observations of a two-factor experiment: cell(i, j) holds the replicates of
// combination (A_i, B_j) in input order. Every cell must be populated.
class TwoFactorData {
  public:
    TwoFactorData(std::vector<std::vector<std::vector<double>>> obs,
                  std::vector<std::string> labels_a = {}, std::vector<std::string> labels_b = {});

    std::size_t levels_a() const { return obs_.size(); }
    std::size_t levels_b() const { return obs_[0].size(); }
    std::size_t replicates(std::size_t i, std::size_t j) const { return obs_[i][j].size(); }
    std::size_t margin_a(std::size_t i) const;  // m_i.
    std::size_t margin_b(std::size_t j) const;  // m_.j
    std::size_t total() const { return total_; }
    bool balanced() const { return balanced_; }

    double weight(std::size_t i, std::size_t j) const {
        return static_cast<double>(obs_[i][j].size()) / static_cast<double>(total_);
    }
    double weight_a(std::size_t i) const {
        return static_cast<double>(margin_a(i)) / static_cast<double>(total_);
    }
    double weight_b(std::size_t j) const {
        return static_cast<double>(margin_b(j)) / static_cast<double>(total_);
    }

    const std::vector<double>& cell(std::size_t i, std::size_t j) const { return obs_[i][j]; }
    const std::string& label_a(std::size_t i) const { return labels_a_[i]; }
    const std::string& label_b(std::size_t j) const { return labels_b_[j]; }
    const std::vector<std::string>& labels_a() const { return labels_a_; }
    const std::vector<std::string>& labels_b() const { return labels_b_; }

  private:
    std::vector<std::vector<std::vector<double>>> obs_;
    std::vector<std::string> labels_a_, labels_b_;
    std::size_t total_ = 0;
    bool balanced_ = false;
};

using Dataset = std::variant<SingleFactorData, TwoFactorData>;

// CSV with header `level_a[,level_b],value`, UTF-8, '.' decimal point. Level
// labels map to indices in first-appearance order; replicate order within a
// cell is input order. Errors carry 1-based line numbers.
Dataset parse_csv(std::istream& in, DesignKind schema);

// Merge all observations sharing one level of `which` across the other
// factor, preserving (other-level, replicate) order. Level i of the result is
// the combined sample of A_i (resp. B_j).
SingleFactorData collapse_by_factor(const TwoFactorData& d, Factor which);

// A sample with known constants subtracted out, remembering what was removed.
struct AdjustedSample {
    enum class Origin { ShiftByMu0, CellBaseline, CollapsedA, CollapsedB };

    std::vector<double> values;
    Origin origin = Origin::ShiftByMu0;
    std::vector<std::pair<std::string, double>> constants;
};

// values - mu0, elementwise.
AdjustedSample adjust_shift(const std::vector<double>& sample, double mu0,
                            AdjustedSample::Origin origin = AdjustedSample::Origin::ShiftByMu0);

// Cell (i, j) minus its additive baseline mu0 + ai0 + bj0.
AdjustedSample adjust_cell(const TwoFactorData& d, std::size_t i, std::size_t j, double mu0,
                           double ai0, double bj0);

// sqrt((1/m) sum (x_k - center)^2): the zero-centered second moment used for
// every sigma estimate in the pipeline.
double moment_sigma(const std::vector<double>& sample, double center);

// Mean of a nonempty sample.
double mean(const std::vector<double>& sample);

}  // namespace ufe::design
