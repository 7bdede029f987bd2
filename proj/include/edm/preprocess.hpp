#pragma once

#include "edm/features.hpp"

#include <string>
#include <vector>

namespace edm {

// Per-column statistics learned on training rows only. Applying the plan
// never looks at anything beyond what is stored here.
struct ColumnPlan {
    std::string name;
    Block block = Block::N1;
    ColumnType dtype = ColumnType::numeric;
    // numeric
    double winsor_lo = 0.0;
    double winsor_hi = 0.0;
    double impute_value = 0.0;
    bool all_missing_in_train = false; // impute 0 and emit a was_missing indicator
    // categorical
    std::vector<std::string> vocabulary; // training categories, sorted
    std::string impute_category;
    // boolean
    bool impute_flag = false;
};

struct PreprocessPlan {
    std::vector<ColumnPlan> columns;
    std::string to_json() const;
};

// Fully numeric design matrix, column-major. Each design column remembers the
// matrix column it came from and its block, which is what importance
// aggregation keys on.
struct DesignMatrix {
    std::vector<std::string> names;
    std::vector<Block> blocks;
    std::vector<std::string> source;         // originating matrix column
    std::vector<std::vector<double>> cols;   // cols[c][r]
    int n_rows = 0;

    int n_cols() const { return static_cast<int>(cols.size()); }
};

// throws DataError on an empty training set
PreprocessPlan fit_preprocess(const FeatureMatrix& m, const std::vector<int>& train_rows);

DesignMatrix apply_preprocess(const PreprocessPlan& plan, const FeatureMatrix& m,
                              const std::vector<int>& rows);

} // namespace edm
