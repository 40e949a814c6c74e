#include "ufe/design_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

namespace ufe::design {

namespace {

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidInputError(std::string(what) + " must be finite");
}

std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::to_string(i + 1);
    return out;
}

}  // namespace

SingleFactorData::SingleFactorData(std::vector<std::vector<double>> obs,
                                   std::vector<std::string> labels)
    : obs_(std::move(obs)), labels_(std::move(labels)) {
    if (obs_.size() < 2) throw SchemaError("level count r >= 2 required");
    for (const auto& row : obs_) {
        if (row.empty()) throw SchemaError("every level needs at least one observation");
        for (double v : row) check_finite(v, "observation");
        total_ += row.size();
    }
    if (labels_.empty()) labels_ = default_labels(obs_.size());
    if (labels_.size() != obs_.size())
        throw SchemaError("label count does not match level count");
}

TwoFactorData::TwoFactorData(std::vector<std::vector<std::vector<double>>> obs,
                             std::vector<std::string> labels_a, std::vector<std::string> labels_b)
    : obs_(std::move(obs)), labels_a_(std::move(labels_a)), labels_b_(std::move(labels_b)) {
    if (obs_.size() < 2) throw SchemaError("factor A needs at least 2 levels");
    const std::size_t s = obs_[0].size();
    if (s < 2) throw SchemaError("factor B needs at least 2 levels");
    std::size_t m0 = 0;
    balanced_ = true;
    for (std::size_t i = 0; i < obs_.size(); ++i) {
        if (obs_[i].size() != s) throw SchemaError("ragged level structure for factor B");
        for (std::size_t j = 0; j < s; ++j) {
            const auto& cellv = obs_[i][j];
            if (cellv.empty())
                throw SchemaError("cell (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                  ") has no observations");
            for (double v : cellv) check_finite(v, "observation");
            if (i == 0 && j == 0) m0 = cellv.size();
            if (cellv.size() != m0) balanced_ = false;
            total_ += cellv.size();
        }
    }
    if (labels_a_.empty()) labels_a_ = default_labels(obs_.size());
    if (labels_b_.empty()) labels_b_ = default_labels(s);
    if (labels_a_.size() != obs_.size() || labels_b_.size() != s)
        throw SchemaError("label count does not match level count");
}

std::size_t TwoFactorData::margin_a(std::size_t i) const {
    std::size_t m = 0;
    for (const auto& cellv : obs_[i]) m += cellv.size();
    return m;
}

std::size_t TwoFactorData::margin_b(std::size_t j) const {
    std::size_t m = 0;
    for (const auto& rowv : obs_) m += rowv[j].size();
    return m;
}

namespace {

struct CsvRow {
    std::vector<std::string> fields;
    long line;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<CsvRow> read_rows(std::istream& in) {
    std::vector<CsvRow> rows;
    std::string line;
    long n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        CsvRow row{{}, n};
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) row.fields.push_back(trim(field));
        if (!line.empty() && line.back() == ',') row.fields.emplace_back();
        rows.push_back(std::move(row));
    }
    return rows;
}

double parse_value(const std::string& s, long line) {
    if (s.empty()) throw SchemaError("empty value field", line);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw SchemaError("non-numeric value '" + s + "'", line);
    return v;
}

// First-appearance label index, shared by integer-looking and textual labels.
std::size_t level_index(std::vector<std::string>& order, const std::string& label, long line) {
    if (label.empty()) throw SchemaError("empty level field", line);
    auto it = std::find(order.begin(), order.end(), label);
    if (it != order.end()) return static_cast<std::size_t>(it - order.begin());
    order.push_back(label);
    return order.size() - 1;
}

}  // namespace

Dataset parse_csv(std::istream& in, DesignKind schema) {
    const auto rows = read_rows(in);
    if (rows.empty()) throw SchemaError("empty input", 1);

    const std::size_t want = schema == DesignKind::Single ? 2 : 3;
    const auto& header = rows.front();
    if (header.fields.size() != want || header.fields[0] != "level_a" ||
        header.fields[want - 1] != "value" ||
        (want == 3 && header.fields[1] != "level_b"))
        throw SchemaError(schema == DesignKind::Single
                              ? "expected header 'level_a,value'"
                              : "expected header 'level_a,level_b,value'",
                          header.line);

    if (schema == DesignKind::Single) {
        std::vector<std::string> order;
        std::vector<std::vector<double>> obs;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const auto& r = rows[k];
            if (r.fields.size() != 2)
                throw SchemaError("expected 2 columns, got " + std::to_string(r.fields.size()),
                                  r.line);
            const std::size_t i = level_index(order, r.fields[0], r.line);
            if (i == obs.size()) obs.emplace_back();
            obs[i].push_back(parse_value(r.fields[1], r.line));
        }
        if (obs.empty()) throw SchemaError("no data rows");
        return SingleFactorData(std::move(obs), std::move(order));
    }

    std::vector<std::string> order_a, order_b;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> cells;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto& r = rows[k];
        if (r.fields.size() != 3)
            throw SchemaError("expected 3 columns, got " + std::to_string(r.fields.size()),
                              r.line);
        const std::size_t i = level_index(order_a, r.fields[0], r.line);
        const std::size_t j = level_index(order_b, r.fields[1], r.line);
        cells[{i, j}].push_back(parse_value(r.fields[2], r.line));
    }
    if (cells.empty()) throw SchemaError("no data rows");

    std::vector<std::vector<std::vector<double>>> obs(
        order_a.size(), std::vector<std::vector<double>>(order_b.size()));
    for (std::size_t i = 0; i < order_a.size(); ++i)
        for (std::size_t j = 0; j < order_b.size(); ++j) {
            auto it = cells.find({i, j});
            if (it == cells.end())
                throw SchemaError("cell (" + order_a[i] + "," + order_b[j] +
                                  ") has no observations");
            obs[i][j] = std::move(it->second);
        }
    return TwoFactorData(std::move(obs), std::move(order_a), std::move(order_b));
}

SingleFactorData collapse_by_factor(const TwoFactorData& d, Factor which) {
    std::vector<std::vector<double>> obs;
    std::vector<std::string> labels;
    if (which == Factor::A) {
        obs.resize(d.levels_a());
        for (std::size_t i = 0; i < d.levels_a(); ++i)
            for (std::size_t j = 0; j < d.levels_b(); ++j) {
                const auto& c = d.cell(i, j);
                obs[i].insert(obs[i].end(), c.begin(), c.end());
            }
        labels = d.labels_a();
    } else {
        obs.resize(d.levels_b());
        for (std::size_t j = 0; j < d.levels_b(); ++j)
            for (std::size_t i = 0; i < d.levels_a(); ++i) {
                const auto& c = d.cell(i, j);
                obs[j].insert(obs[j].end(), c.begin(), c.end());
            }
        labels = d.labels_b();
    }
    return SingleFactorData(std::move(obs), std::move(labels));
}

AdjustedSample adjust_shift(const std::vector<double>& sample, double mu0,
                            AdjustedSample::Origin origin) {
    check_finite(mu0, "mu0");
    AdjustedSample out;
    out.origin = origin;
    out.constants = {{"mu0", mu0}};
    out.values.reserve(sample.size());
    for (double v : sample) out.values.push_back(v - mu0);
    return out;
}

AdjustedSample adjust_cell(const TwoFactorData& d, std::size_t i, std::size_t j, double mu0,
                           double ai0, double bj0) {
    check_finite(mu0, "mu0");
    check_finite(ai0, "ai0");
    check_finite(bj0, "bj0");
    AdjustedSample out;
    out.origin = AdjustedSample::Origin::CellBaseline;
    out.constants = {{"mu0", mu0}, {"a_i0", ai0}, {"b_j0", bj0}};
    const double baseline = mu0 + ai0 + bj0;
    for (double v : d.cell(i, j)) out.values.push_back(v - baseline);
    return out;
}

double moment_sigma(const std::vector<double>& sample, double center) {
    if (sample.empty()) throw InvalidInputError("moment_sigma: empty sample");
    check_finite(center, "center");
    double ss = 0.0;
    for (double v : sample) {
        const double dlt = v - center;
        ss += dlt * dlt;
    }
    return std::sqrt(ss / static_cast<double>(sample.size()));
}

double mean(const std::vector<double>& sample) {
    if (sample.empty()) throw InvalidInputError("mean: empty sample");
    return std::accumulate(sample.begin(), sample.end(), 0.0) /
           static_cast<double>(sample.size());
}

}  // namespace ufe::design
