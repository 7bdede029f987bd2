#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace edm {

// One leave-cohort-out fold. A fold's test set is a group of whole cohorts,
// or half of a split cohort; a split cohort is excluded from training in
// both of its folds so group separation stays at cohort granularity.
struct Fold {
    std::vector<int> test_cohorts;          // years whose students are being tested
    int split_part = -1;                    // -1 whole cohorts; 0/1 = half of test_cohorts[0]
    std::vector<std::string> test_students; // resolved, sorted
    std::set<int> train_cohorts;            // years available for training
};

struct FoldPlan {
    std::vector<Fold> folds;
    int target_folds = 0;
    int min_test = 0;

    std::string to_json() const;
};

// Grouping starts from one fold per cohort in year order. Undersized test
// sets merge into their smaller adjacent neighbour; if the count still
// exceeds target_folds the smallest adjacent pair merges, and when the
// target exceeds the cohort count the largest cohort splits in two by
// student-id hash. Deterministic throughout.
FoldPlan plan_folds(const std::map<int, std::vector<std::string>>& cohort_students,
                    int target_folds, int min_test);

} // namespace edm
