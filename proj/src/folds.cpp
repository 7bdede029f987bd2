#include "edm/folds.hpp"

#include "edm/dataset.hpp"
#include "edm/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>

using nlohmann::json;

namespace edm {

std::string FoldPlan::to_json() const {
    json doc;
    doc["target_folds"] = target_folds;
    doc["min_test"] = min_test;
    json jfolds = json::array();
    for (const auto& f : folds) {
        json jf;
        jf["test_cohorts"] = f.test_cohorts;
        jf["split_part"] = f.split_part;
        jf["n_test"] = f.test_students.size();
        jf["train_cohorts"] = std::vector<int>(f.train_cohorts.begin(), f.train_cohorts.end());
        jfolds.push_back(std::move(jf));
    }
    doc["folds"] = std::move(jfolds);
    return doc.dump(2);
}

FoldPlan plan_folds(const std::map<int, std::vector<std::string>>& cohort_students,
                    int target_folds, int min_test) {
    if (cohort_students.size() < 2)
        throw DataError("plan_folds: need at least two cohorts");
    long population = 0;
    for (const auto& [year, students] : cohort_students) {
        (void)year;
        population += static_cast<long>(students.size());
    }
    if (min_test > population)
        throw DataError("plan_folds: min_test exceeds the total population");

    // groups of adjacent cohorts, in year order
    struct Group {
        std::vector<int> years;
        long size = 0;
    };
    std::vector<Group> groups;
    for (const auto& [year, students] : cohort_students)
        groups.push_back({{year}, static_cast<long>(students.size())});

    auto merge_into = [&groups](std::size_t a, std::size_t b) {
        // keep year order: merge the later group into the earlier one
        if (a > b) std::swap(a, b);
        for (int y : groups[b].years) groups[a].years.push_back(y);
        groups[a].size += groups[b].size;
        groups.erase(groups.begin() + static_cast<long>(b));
    };

    // merge undersized test groups into their smaller adjacent neighbour
    for (;;) {
        std::size_t victim = groups.size();
        for (std::size_t i = 0; i < groups.size(); ++i)
            if (groups[i].size < min_test) { victim = i; break; }
        if (victim == groups.size() || groups.size() == 1) break;
        std::size_t neighbour;
        if (victim == 0) neighbour = 1;
        else if (victim + 1 == groups.size()) neighbour = victim - 1;
        else neighbour = groups[victim - 1].size <= groups[victim + 1].size ? victim - 1 : victim + 1;
        merge_into(victim, neighbour);
    }

    // too many folds: repeatedly merge the adjacent pair with the smallest sum
    while (static_cast<int>(groups.size()) > target_folds && groups.size() > 1) {
        std::size_t best = 0;
        long best_sum = std::numeric_limits<long>::max();
        for (std::size_t i = 0; i + 1 < groups.size(); ++i) {
            const long sum = groups[i].size + groups[i + 1].size;
            if (sum < best_sum) {
                best_sum = sum;
                best = i;
            }
        }
        merge_into(best, best + 1);
    }

    FoldPlan plan;
    plan.target_folds = target_folds;
    plan.min_test = min_test;

    // too few: split the largest single-cohort group in two by id hash
    int split_year = -1;
    if (static_cast<int>(groups.size()) == target_folds - 1) {
        long best_size = -1;
        for (const auto& g : groups)
            if (g.years.size() == 1 && g.size > best_size) {
                best_size = g.size;
                split_year = g.years[0];
            }
    }

    const std::set<int> all_years = [&cohort_students] {
        std::set<int> out;
        for (const auto& [year, students] : cohort_students) {
            (void)year;
            (void)students;
            out.insert(year);
        }
        return out;
    }();

    auto train_excluding = [&all_years](const std::vector<int>& test_years) {
        std::set<int> train = all_years;
        for (int y : test_years) train.erase(y);
        return train;
    };

    for (const auto& g : groups) {
        if (g.years.size() == 1 && g.years[0] == split_year) {
            Fold half0, half1;
            half0.test_cohorts = {split_year};
            half1.test_cohorts = {split_year};
            half0.split_part = 0;
            half1.split_part = 1;
            for (const auto& id : cohort_students.at(split_year)) {
                const std::uint64_t h = fnv1a64(id.data(), id.size());
                ((h & 1u) == 0 ? half0 : half1).test_students.push_back(id);
            }
            std::sort(half0.test_students.begin(), half0.test_students.end());
            std::sort(half1.test_students.begin(), half1.test_students.end());
            half0.train_cohorts = train_excluding(half0.test_cohorts);
            half1.train_cohorts = train_excluding(half1.test_cohorts);
            plan.folds.push_back(std::move(half0));
            plan.folds.push_back(std::move(half1));
            continue;
        }
        Fold fold;
        fold.test_cohorts = g.years;
        std::sort(fold.test_cohorts.begin(), fold.test_cohorts.end());
        for (int y : fold.test_cohorts)
            for (const auto& id : cohort_students.at(y)) fold.test_students.push_back(id);
        std::sort(fold.test_students.begin(), fold.test_students.end());
        fold.train_cohorts = train_excluding(fold.test_cohorts);
        plan.folds.push_back(std::move(fold));
    }

    return plan;
}

} // namespace edm
