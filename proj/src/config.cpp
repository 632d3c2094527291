#include "boostinf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace boostinf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) fail(line, "trailing characters in number '" + v + "'");
        return d;
    } catch (const std::invalid_argument&) {
        fail(line, "expected a number, got '" + v + "'");
    } catch (const std::out_of_range&) {
        fail(line, "number out of range: '" + v + "'");
    }
}

long long parse_int(const std::string& v, int line) {
    long long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        fail(line, "expected an integer, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(line, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_commas(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(v);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    enum class Section { top, learner, target } section = Section::top;
    bool saw_response = false;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        if (line == "[learner]") {
            section = Section::learner;
            cfg.learners.emplace_back();
            continue;
        }
        if (line == "[target]") {
            section = Section::target;
            cfg.targets.emplace_back();
            continue;
        }
        if (line.front() == '[') fail(line_no, "unknown section " + line);

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) fail(line_no, "empty value for '" + key + "'");

        if (section == Section::top) {
            if (key == "data") cfg.data_path = value;
            else if (key == "response") { cfg.response = value; saw_response = true; }
            else if (key == "nu") cfg.nu = parse_double(value, line_no);
            else if (key == "stopping") {
                if (value == "fixed") cfg.stopping.kind = StoppingDecl::Kind::fixed_m;
                else if (value == "cv") cfg.stopping.kind = StoppingDecl::Kind::cv;
                else fail(line_no, "stopping must be fixed or cv");
            } else if (key == "mstop") cfg.stopping.mstop = static_cast<int>(parse_int(value, line_no));
            else if (key == "cv_folds") cfg.stopping.cv_folds = static_cast<int>(parse_int(value, line_no));
            else if (key == "cv_grid_max") cfg.stopping.cv_grid_max = static_cast<int>(parse_int(value, line_no));
            else if (key == "cv_seed") cfg.stopping.cv_seed = static_cast<std::uint64_t>(parse_int(value, line_no));
            else if (key == "variance") {
                if (value == "known") cfg.variance = VarianceMode::known;
                else if (value == "boost_residual") cfg.variance = VarianceMode::boost_residual;
                else if (value == "response") cfg.variance = VarianceMode::response;
                else if (value == "ols_refit") cfg.variance = VarianceMode::ols_refit;
                else fail(line_no, "unknown variance mode '" + value + "'");
            } else if (key == "sigma2") cfg.sigma2 = parse_double(value, line_no);
            else if (key == "method") {
                if (value == "sampling") cfg.method = RunConfig::Method::sampling;
                else if (value == "polyhedron") cfg.method = RunConfig::Method::polyhedron;
                else fail(line_no, "method must be sampling or polyhedron");
            } else if (key == "samples") cfg.num_samples = static_cast<int>(parse_int(value, line_no));
            else if (key == "alpha") cfg.alpha = parse_double(value, line_no);
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, line_no));
            else if (key == "threads") cfg.threads = static_cast<int>(parse_int(value, line_no));
            else fail(line_no, "unknown key '" + key + "'");
        } else if (section == Section::learner) {
            LearnerDecl& l = cfg.learners.back();
            if (key == "name") l.name = value;
            else if (key == "type") {
                if (value == "linear") l.type = LearnerDecl::Type::linear;
                else if (value == "spline") l.type = LearnerDecl::Type::spline;
                else if (value == "group") l.type = LearnerDecl::Type::group;
                else fail(line_no, "unknown learner type '" + value + "'");
            } else if (key == "column") l.columns = {value};
            else if (key == "columns") l.columns = split_commas(value);
            else if (key == "degree") l.spline.degree = static_cast<int>(parse_int(value, line_no));
            else if (key == "knots") l.spline.num_interior_knots = static_cast<int>(parse_int(value, line_no));
            else if (key == "diff_order") l.spline.diff_order = static_cast<int>(parse_int(value, line_no));
            else if (key == "lambda") l.lambda = parse_double(value, line_no);
            else if (key == "df") l.df = parse_double(value, line_no);
            else if (key == "deviation") l.deviation = parse_bool(value, line_no);
            else fail(line_no, "unknown learner key '" + key + "'");
        } else {
            TargetDecl& t = cfg.targets.back();
            if (key == "learner") t.learner = value;
            else if (key == "kind") {
                if (value == "coefficient") t.kind = TargetDecl::Kind::coefficient;
                else if (value == "pointwise") t.kind = TargetDecl::Kind::pointwise;
                else if (value == "whole-function") t.kind = TargetDecl::Kind::whole_function;
                else fail(line_no, "unknown target kind '" + value + "'");
            } else if (key == "grid") {
                for (const auto& tok : split_commas(value)) t.grid.push_back(parse_double(tok, 0));
            } else fail(line_no, "unknown target key '" + key + "'");
        }
    }

    // structural validation
    if (!saw_response) throw std::invalid_argument("config: missing response");
    if (cfg.learners.empty()) throw std::invalid_argument("config: no learners declared");
    for (const auto& l : cfg.learners) {
        if (l.name.empty()) throw std::invalid_argument("config: learner without a name");
        if (l.columns.empty())
            throw std::invalid_argument("config: learner '" + l.name + "' has no columns");
        if (l.type != LearnerDecl::Type::group && l.columns.size() != 1)
            throw std::invalid_argument("config: learner '" + l.name + "' takes a single column");
        if (l.type == LearnerDecl::Type::spline && l.lambda && l.df)
            throw std::invalid_argument("config: learner '" + l.name + "' sets both lambda and df");
    }
    for (std::size_t a = 0; a < cfg.learners.size(); ++a)
        for (std::size_t b = a + 1; b < cfg.learners.size(); ++b)
            if (cfg.learners[a].name == cfg.learners[b].name)
                throw std::invalid_argument("config: duplicate learner name '" + cfg.learners[a].name + "'");
    for (const auto& t : cfg.targets) {
        const bool known = std::any_of(cfg.learners.begin(), cfg.learners.end(),
                                       [&](const LearnerDecl& l) { return l.name == t.learner; });
        if (!known)
            throw std::invalid_argument("config: target references unknown learner '" + t.learner + "'");
        if (t.kind == TargetDecl::Kind::pointwise && t.grid.empty())
            throw std::invalid_argument("config: pointwise target for '" + t.learner + "' needs a grid");
    }
    if (!(cfg.nu > 0.0 && cfg.nu <= 1.0)) throw std::invalid_argument("config: nu must be in (0, 1]");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("config: alpha in (0, 1)");
    if (cfg.method == RunConfig::Method::sampling && !cfg.targets.empty() && cfg.num_samples < 100)
        throw std::invalid_argument("config: sampling method needs samples >= 100");
    if (cfg.variance == VarianceMode::known && !(cfg.sigma2 > 0.0))
        throw std::invalid_argument("config: known variance requires sigma2 > 0");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string write_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "data = " << cfg.data_path << "\n";
    os << "response = " << cfg.response << "\n";
    os << "nu = " << num(cfg.nu) << "\n";
    if (cfg.stopping.kind == StoppingDecl::Kind::fixed_m) {
        os << "stopping = fixed\n";
        os << "mstop = " << cfg.stopping.mstop << "\n";
    } else {
        os << "stopping = cv\n";
        os << "cv_folds = " << cfg.stopping.cv_folds << "\n";
        os << "cv_grid_max = " << cfg.stopping.cv_grid_max << "\n";
        os << "cv_seed = " << cfg.stopping.cv_seed << "\n";
    }
    switch (cfg.variance) {
    case VarianceMode::known: os << "variance = known\nsigma2 = " << num(cfg.sigma2) << "\n"; break;
    case VarianceMode::boost_residual: os << "variance = boost_residual\n"; break;
    case VarianceMode::response: os << "variance = response\n"; break;
    case VarianceMode::ols_refit: os << "variance = ols_refit\n"; break;
    }
    os << "method = "
       << (cfg.method == RunConfig::Method::sampling ? "sampling" : "polyhedron") << "\n";
    os << "samples = " << cfg.num_samples << "\n";
    os << "alpha = " << num(cfg.alpha) << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "threads = " << cfg.threads << "\n";
    for (const auto& l : cfg.learners) {
        os << "\n[learner]\n";
        os << "name = " << l.name << "\n";
        switch (l.type) {
        case LearnerDecl::Type::linear: os << "type = linear\n"; break;
        case LearnerDecl::Type::spline: os << "type = spline\n"; break;
        case LearnerDecl::Type::group: os << "type = group\n"; break;
        }
        if (l.columns.size() == 1) {
            os << "column = " << l.columns.front() << "\n";
        } else {
            os << "columns = ";
            for (std::size_t i = 0; i < l.columns.size(); ++i)
                os << (i ? "," : "") << l.columns[i];
            os << "\n";
        }
        if (l.type == LearnerDecl::Type::spline) {
            os << "degree = " << l.spline.degree << "\n";
            os << "knots = " << l.spline.num_interior_knots << "\n";
            os << "diff_order = " << l.spline.diff_order << "\n";
            if (l.lambda) os << "lambda = " << num(*l.lambda) << "\n";
            if (l.df) os << "df = " << num(*l.df) << "\n";
            if (l.deviation) os << "deviation = true\n";
        }
    }
    for (const auto& t : cfg.targets) {
        os << "\n[target]\n";
        os << "learner = " << t.learner << "\n";
        switch (t.kind) {
        case TargetDecl::Kind::coefficient: os << "kind = coefficient\n"; break;
        case TargetDecl::Kind::pointwise: os << "kind = pointwise\n"; break;
        case TargetDecl::Kind::whole_function: os << "kind = whole-function\n"; break;
        }
        if (!t.grid.empty()) {
            os << "grid = ";
            for (std::size_t i = 0; i < t.grid.size(); ++i) os << (i ? "," : "") << num(t.grid[i]);
            os << "\n";
        }
    }
    return os.str();
}

} // namespace boostinf
