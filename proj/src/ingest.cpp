#include "boostinf/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace boostinf {

Index Dataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<Index>(i);
    throw std::invalid_argument("missing column '" + name + "'");
}

Dataset parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        any = true;
    };
    auto end_record = [&] {
        if (any || !record.empty()) {
            end_field();
            records.push_back(std::move(record));
            record.clear();
            any = false;
            field.clear();
        }
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            end_field();
        } else if (ch == '\n') {
            if (!field.empty() || any || !record.empty()) end_record();
        } else if (ch != '\r') {
            field.push_back(ch);
            any = true;
        }
    }
    if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
    if (!field.empty() || any || !record.empty()) end_record();

    if (records.empty()) throw std::invalid_argument("csv: empty file");
    Dataset data;
    data.columns = records.front();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != data.columns.size())
            throw std::invalid_argument("csv: row " + std::to_string(r) + " has " +
                                        std::to_string(records[r].size()) + " fields, expected " +
                                        std::to_string(data.columns.size()));
        data.rows.push_back(std::move(records[r]));
    }
    return data;
}

Dataset read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

namespace {

bool try_parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    const char* stop = e;
    while (stop > b && (stop[-1] == ' ' || stop[-1] == '\t')) --stop;
    if (b == stop) return false;
    const auto [p, ec] = std::from_chars(b, stop, out);
    return ec == std::errc() && p == stop;
}

Vector numeric_column(const Dataset& data, const std::string& name) {
    const Index col = data.column_index(name);
    Vector out(static_cast<Index>(data.rows.size()));
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        double v;
        if (!try_parse_double(data.rows[r][static_cast<std::size_t>(col)], v))
            throw std::invalid_argument("non-numeric cell '" +
                                        data.rows[r][static_cast<std::size_t>(col)] + "' at row " +
                                        std::to_string(r + 1) + " column '" + name + "'");
        out(static_cast<Index>(r)) = v;
    }
    return out;
}

bool column_is_numeric(const Dataset& data, const std::string& name) {
    const Index col = data.column_index(name);
    double v;
    for (const auto& row : data.rows)
        if (!try_parse_double(row[static_cast<std::size_t>(col)], v)) return false;
    return true;
}

// k levels -> k-1 centered dummies (first level in sort order dropped)
Matrix factor_dummies(const Dataset& data, const std::string& name,
                      std::vector<std::string>& level_names) {
    const Index col = data.column_index(name);
    std::set<std::string> levels;
    for (const auto& row : data.rows) levels.insert(row[static_cast<std::size_t>(col)]);
    if (levels.size() < 2)
        throw std::invalid_argument("factor column '" + name + "' has fewer than two levels");
    std::vector<std::string> ordered(levels.begin(), levels.end());
    Matrix x = Matrix::Zero(static_cast<Index>(data.rows.size()),
                            static_cast<Index>(ordered.size() - 1));
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        const auto& cell = data.rows[r][static_cast<std::size_t>(col)];
        for (std::size_t l = 1; l < ordered.size(); ++l)
            if (cell == ordered[l]) x(static_cast<Index>(r), static_cast<Index>(l - 1)) = 1.0;
    }
    for (std::size_t l = 1; l < ordered.size(); ++l)
        level_names.push_back(name + "=" + ordered[l]);
    return x;
}

} // namespace

Index Model::learner_index(const std::string& name) const {
    for (std::size_t i = 0; i < learner_names.size(); ++i)
        if (learner_names[i] == name) return static_cast<Index>(i);
    throw std::invalid_argument("unknown learner '" + name + "'");
}

Model ingest(const Dataset& data, const RunConfig& cfg) {
    if (data.rows.size() < 3) throw std::invalid_argument("fewer than 3 data rows");

    Model model;
    Vector y = numeric_column(data, cfg.response);
    model.centering.response_mean = y.mean();
    model.y = centered(y);

    int id = 0;
    for (const auto& decl : cfg.learners) {
        switch (decl.type) {
        case LearnerDecl::Type::linear: {
            Vector col = numeric_column(data, decl.columns.front());
            model.centering.column_means[decl.columns.front()] = col.mean();
            model.learners.push_back(make_linear_learner(id, centered(col)));
            break;
        }
        case LearnerDecl::Type::spline: {
            const Vector col = numeric_column(data, decl.columns.front());
            Smoothing smoothing = decl.lambda ? Smoothing::fixed(*decl.lambda)
                                              : Smoothing::for_df(decl.df ? *decl.df : 4.0);
            model.learners.push_back(
                make_spline_learner(id, col, decl.spline, smoothing, decl.deviation));
            break;
        }
        case LearnerDecl::Type::group: {
            Matrix x;
            if (decl.columns.size() == 1 && !column_is_numeric(data, decl.columns.front())) {
                std::vector<std::string> level_names;
                x = factor_dummies(data, decl.columns.front(), level_names);
            } else {
                x.resize(static_cast<Index>(data.rows.size()),
                         static_cast<Index>(decl.columns.size()));
                for (std::size_t c = 0; c < decl.columns.size(); ++c) {
                    Vector col = numeric_column(data, decl.columns[c]);
                    model.centering.column_means[decl.columns[c]] = col.mean();
                    x.col(static_cast<Index>(c)) = col;
                }
            }
            model.learners.push_back(make_group_learner(id, center_columns(x)));
            break;
        }
        }
        model.learner_names.push_back(decl.name);
        ++id;
    }
    return model;
}

} // namespace boostinf
