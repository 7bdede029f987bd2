#include "edm/preprocess.hpp"

#include "edm/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>

using nlohmann::json;

namespace edm {

std::string PreprocessPlan::to_json() const {
    json cols = json::array();
    for (const auto& c : columns) {
        json jc;
        jc["name"] = c.name;
        jc["block"] = block_name(c.block);
        jc["dtype"] = column_type_name(c.dtype);
        switch (c.dtype) {
        case ColumnType::numeric:
            jc["winsor_lo"] = c.winsor_lo;
            jc["winsor_hi"] = c.winsor_hi;
            jc["impute_value"] = c.impute_value;
            jc["all_missing_in_train"] = c.all_missing_in_train;
            break;
        case ColumnType::categorical:
            jc["vocabulary"] = c.vocabulary;
            jc["impute_category"] = c.impute_category;
            break;
        case ColumnType::boolean:
            jc["impute_flag"] = c.impute_flag;
            break;
        }
        cols.push_back(std::move(jc));
    }
    return cols.dump(2);
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// mode with deterministic ties: highest count, then lexicographically first
std::string mode_of(const std::map<std::string, int>& counts) {
    std::string best;
    int best_count = -1;
    for (const auto& [value, count] : counts)
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    return best;
}

} // namespace

PreprocessPlan fit_preprocess(const FeatureMatrix& m, const std::vector<int>& train_rows) {
    if (train_rows.empty()) throw DataError("fit_preprocess: empty training set");
    PreprocessPlan plan;
    plan.columns.reserve(m.n_cols());
    for (int c = 0; c < m.n_cols(); ++c) {
        const auto& col = m.columns[c];
        ColumnPlan cp;
        cp.name = col.name;
        cp.block = col.block;
        cp.dtype = col.dtype;
        switch (col.dtype) {
        case ColumnType::numeric: {
            std::vector<double> present;
            for (int r : train_rows) {
                const Cell& cell = m.cells[c][r];
                if (!cell.missing) present.push_back(cell.num);
            }
            if (present.empty()) {
                cp.all_missing_in_train = true;
                cp.impute_value = 0.0;
                cp.winsor_lo = 0.0;
                cp.winsor_hi = 0.0;
            } else {
                cp.winsor_lo = lower_quantile(present, 0.01);
                cp.winsor_hi = lower_quantile(present, 0.99);
                std::vector<double> clipped;
                clipped.reserve(present.size());
                for (double v : present)
                    clipped.push_back(std::clamp(v, cp.winsor_lo, cp.winsor_hi));
                cp.impute_value = median_of(std::move(clipped));
            }
            break;
        }
        case ColumnType::categorical: {
            std::map<std::string, int> counts;
            for (int r : train_rows) {
                const Cell& cell = m.cells[c][r];
                if (!cell.missing) counts[cell.cat] += 1;
            }
            for (const auto& [value, count] : counts) {
                (void)count;
                cp.vocabulary.push_back(value);
            }
            cp.impute_category = counts.empty() ? std::string{} : mode_of(counts);
            break;
        }
        case ColumnType::boolean: {
            int ones = 0, zeros = 0;
            for (int r : train_rows) {
                const Cell& cell = m.cells[c][r];
                if (cell.missing) continue;
                (cell.flag ? ones : zeros) += 1;
            }
            cp.impute_flag = ones > zeros; // ties impute false
            break;
        }
        }
        plan.columns.push_back(std::move(cp));
    }
    return plan;
}

DesignMatrix apply_preprocess(const PreprocessPlan& plan, const FeatureMatrix& m,
                              const std::vector<int>& rows) {
    if (plan.columns.size() != static_cast<std::size_t>(m.n_cols()))
        throw DataError("apply_preprocess: plan does not match matrix layout");
    DesignMatrix d;
    d.n_rows = static_cast<int>(rows.size());

    auto push_col = [&d](std::string name, Block block, std::string source,
                         std::vector<double> values) {
        d.names.push_back(std::move(name));
        d.blocks.push_back(block);
        d.source.push_back(std::move(source));
        d.cols.push_back(std::move(values));
    };

    for (int c = 0; c < m.n_cols(); ++c) {
        const ColumnPlan& cp = plan.columns[c];
        switch (cp.dtype) {
        case ColumnType::numeric: {
            std::vector<double> values;
            values.reserve(rows.size());
            for (int r : rows) {
                const Cell& cell = m.cells[c][r];
                if (cell.missing) {
                    values.push_back(cp.impute_value);
                } else if (cp.all_missing_in_train) {
                    values.push_back(cell.num);
                } else {
                    values.push_back(std::clamp(cell.num, cp.winsor_lo, cp.winsor_hi));
                }
            }
            push_col(cp.name, cp.block, cp.name, std::move(values));
            if (cp.all_missing_in_train) {
                std::vector<double> indicator;
                indicator.reserve(rows.size());
                for (int r : rows) indicator.push_back(m.cells[c][r].missing ? 1.0 : 0.0);
                push_col(cp.name + "__was_missing", cp.block, cp.name, std::move(indicator));
            }
            break;
        }
        case ColumnType::categorical: {
            // one column per training category plus an OTHER bucket
            std::vector<std::vector<double>> buckets(cp.vocabulary.size() + 1,
                                                     std::vector<double>());
            for (auto& b : buckets) b.reserve(rows.size());
            for (int r : rows) {
                const Cell& cell = m.cells[c][r];
                const std::string& value = cell.missing ? cp.impute_category : cell.cat;
                const auto it =
                    std::lower_bound(cp.vocabulary.begin(), cp.vocabulary.end(), value);
                const std::size_t hit = (it != cp.vocabulary.end() && *it == value)
                                            ? static_cast<std::size_t>(it - cp.vocabulary.begin())
                                            : cp.vocabulary.size(); // OTHER
                for (std::size_t b = 0; b < buckets.size(); ++b)
                    buckets[b].push_back(b == hit ? 1.0 : 0.0);
            }
            for (std::size_t b = 0; b < cp.vocabulary.size(); ++b)
                push_col(cp.name + "=" + cp.vocabulary[b], cp.block, cp.name,
                         std::move(buckets[b]));
            push_col(cp.name + "=OTHER", cp.block, cp.name, std::move(buckets.back()));
            break;
        }
        case ColumnType::boolean: {
            std::vector<double> values;
            values.reserve(rows.size());
            for (int r : rows) {
                const Cell& cell = m.cells[c][r];
                const bool v = cell.missing ? cp.impute_flag : cell.flag;
                values.push_back(v ? 1.0 : 0.0);
            }
            push_col(cp.name, cp.block, cp.name, std::move(values));
            break;
        }
        }
    }
    return d;
}

} // namespace edm
