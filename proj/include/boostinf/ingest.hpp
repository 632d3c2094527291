#pragma once

#include "boostinf/config.hpp"

#include <map>
#include <string>
#include <vector>

namespace boostinf {

struct Dataset {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    Index column_index(const std::string& name) const; // throws if missing
};

// RFC-4180-style CSV: quoted fields, "" escapes, header row required.
Dataset parse_csv(const std::string& text);
Dataset read_csv_file(const std::string& path);

struct CenteringRecord {
    double response_mean = 0.0;
    std::map<std::string, double> column_means; // linear/group columns
};

struct Model {
    Vector y; // centered
    std::vector<BaseLearner> learners;
    std::vector<std::string> learner_names; // index == learner id
    CenteringRecord centering;

    Index learner_index(const std::string& name) const;
};

// Builds the centered response and base-learners declared by the config.
// Non-numeric cells in numeric columns report their row and column; a
// non-numeric single-column group learner becomes centered dummy columns.
Model ingest(const Dataset& data, const RunConfig& cfg);

} // namespace boostinf
