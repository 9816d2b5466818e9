#include "toricvol/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "toricvol/errors.hpp"

namespace toricvol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_bound(const ordered_json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw ValidationError(std::string(what) +
                          ": expected a number or \"inf\"/\"-inf\"");
}

std::vector<Interval> parse_intervals(const ordered_json& j, const char* what) {
    if (!j.is_array())
        throw ValidationError(std::string(what) + ": expected an array of pairs");
    std::vector<Interval> out;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2)
            throw ValidationError(std::string(what) + ": each entry must be [lo, hi]");
        Interval iv{parse_bound(e[0], what), parse_bound(e[1], what)};
        if (!(iv.lo < iv.hi))
            throw ValidationError(std::string(what) + ": lo must be below hi");
        out.push_back(iv);
    }
    return out;
}

ordered_json bound_to_json(double x) {
    if (x == kInf) return "inf";
    if (x == -kInf) return "-inf";
    return x;
}

ordered_json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return j;
}

}  // namespace

SystemSpec parse_system(const ordered_json& j) {
    if (!j.is_object()) throw ValidationError("system: expected an object");
    Field field = Field::complex_coeffs;
    if (j.contains("field")) {
        const std::string f = j.at("field").get<std::string>();
        if (f == "complex")
            field = Field::complex_coeffs;
        else if (f == "real")
            field = Field::real_coeffs;
        else
            throw ValidationError("system: field must be \"complex\" or \"real\"");
    }
    if (!j.contains("polynomials") || !j.at("polynomials").is_array() ||
        j.at("polynomials").empty())
        throw ValidationError("system: needs a non-empty \"polynomials\" array");

    std::vector<SupportSpec> supports;
    for (const auto& poly : j.at("polynomials")) {
        if (!poly.is_object() || !poly.contains("support"))
            throw ValidationError("system: each polynomial needs a \"support\"");
        const auto& sup = poly.at("support");
        if (!sup.is_array() || sup.empty())
            throw ValidationError("system: support must be a non-empty array of rows");
        const std::size_t dims = sup[0].is_array() ? sup[0].size() : 0;
        if (dims == 0)
            throw ValidationError("system: support rows must be non-empty arrays");
        Eigen::MatrixXd exps(sup.size(), dims);
        for (std::size_t r = 0; r < sup.size(); ++r) {
            if (!sup[r].is_array() || sup[r].size() != dims)
                throw ValidationError("system: ragged support rows");
            for (std::size_t c = 0; c < dims; ++c)
                exps(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    sup[r][c].get<double>();
        }
        Eigen::VectorXd var = Eigen::VectorXd::Ones(exps.rows());
        if (poly.contains("variance")) {
            const auto& v = poly.at("variance");
            if (!v.is_array() || v.size() != sup.size())
                throw ValidationError(
                    "system: variance must match the support row count");
            for (std::size_t r = 0; r < v.size(); ++r)
                var[static_cast<Eigen::Index>(r)] = v[r].get<double>();
        }
        supports.emplace_back(std::move(exps), std::move(var));
    }
    return SystemSpec(field, std::move(supports));
}

SystemSpec parse_system_file(const std::string& path) {
    return parse_system(read_json_file(path));
}

Region parse_region(const ordered_json& j) {
    if (!j.is_object() || !j.contains("p"))
        throw ValidationError("region: expected an object with \"p\"");
    Region r;
    r.p = parse_intervals(j.at("p"), "region p");
    if (!j.contains("q") || (j.at("q").is_string() && j.at("q") == "full")) {
        r.q_full = true;
    } else {
        r.q_full = false;
        r.q = parse_intervals(j.at("q"), "region q");
        if (r.q.size() != r.p.size())
            throw ValidationError("region: p and q dimension mismatch");
        for (const auto& iv : r.q)
            if (!iv.bounded())
                throw ValidationError("region: q intervals must be bounded");
    }
    return r;
}

Region parse_region_file(const std::string& path) {
    return parse_region(read_json_file(path));
}

ordered_json system_to_json(const SystemSpec& spec) {
    ordered_json j;
    j["field"] = spec.field() == Field::real_coeffs ? "real" : "complex";
    j["polynomials"] = ordered_json::array();
    for (const auto& s : spec.supports()) {
        ordered_json poly;
        ordered_json rows = ordered_json::array();
        for (int r = 0; r < s.rows(); ++r) {
            ordered_json row = ordered_json::array();
            for (int c = 0; c < s.dims(); ++c)
                row.push_back(static_cast<long long>(std::llround(s.exponents()(r, c))));
            rows.push_back(std::move(row));
        }
        poly["support"] = std::move(rows);
        ordered_json var = ordered_json::array();
        for (int r = 0; r < s.rows(); ++r) var.push_back(s.variance()[r]);
        poly["variance"] = std::move(var);
        j["polynomials"].push_back(std::move(poly));
    }
    return j;
}

ordered_json region_to_json(const Region& region) {
    ordered_json j;
    ordered_json p = ordered_json::array();
    for (const auto& iv : region.p)
        p.push_back(ordered_json::array({bound_to_json(iv.lo), bound_to_json(iv.hi)}));
    j["p"] = std::move(p);
    if (region.q_full) {
        j["q"] = "full";
    } else {
        ordered_json q = ordered_json::array();
        for (const auto& iv : region.q)
            q.push_back(ordered_json::array({iv.lo, iv.hi}));
        j["q"] = std::move(q);
    }
    return j;
}

std::vector<Interval> parse_box_arg(const std::string& arg) {
    std::vector<Interval> out;
    std::stringstream ss(arg);
    std::string part;
    while (std::getline(ss, part, ';')) {
        const auto comma = part.find(',');
        if (comma == std::string::npos)
            throw ValidationError("box: expected \"lo,hi\" pairs separated by ';'");
        double lo, hi;
        try {
            lo = std::stod(part.substr(0, comma));
            hi = std::stod(part.substr(comma + 1));
        } catch (const std::exception&) {
            throw ValidationError("box: cannot parse \"" + part + "\"");
        }
        if (!(lo < hi)) throw ValidationError("box: lo must be below hi");
        out.push_back({lo, hi});
    }
    if (out.empty()) throw ValidationError("box: empty specification");
    return out;
}

Eigen::VectorXd parse_vector_arg(const std::string& arg) {
    std::vector<double> vals;
    std::stringstream ss(arg);
    std::string part;
    while (std::getline(ss, part, ',')) {
        double v;
        try {
            v = std::stod(part);
        } catch (const std::exception&) {
            throw ValidationError("vector: cannot parse \"" + part + "\"");
        }
        vals.push_back(v);
    }
    if (vals.empty()) throw ValidationError("vector: empty specification");
    return Eigen::Map<Eigen::VectorXd>(vals.data(),
                                       static_cast<Eigen::Index>(vals.size()));
}

}  // namespace toricvol
