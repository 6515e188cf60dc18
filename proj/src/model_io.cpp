#include "cvaod/model_io.hpp"

#include "cvaod/errors.hpp"

#include <fstream>
#include <string>

namespace cvaod {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    if (m.cols() == 0) return rows;
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, Index rows, Index cols, const char* name) {
    Matrix m(rows, cols);
    // Empty matrices carry no entries; [] and [[], []] are both accepted.
    if (rows == 0 || cols == 0) {
        if (!j.is_array()) throw DomainError(std::string(name) + " must be an array");
        return m;
    }
    if (!j.is_array() || static_cast<Index>(j.size()) != rows)
        throw DomainError(std::string(name) + " must have " + std::to_string(rows) + " rows");
    for (Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw DomainError(std::string(name) + " row " + std::to_string(i) + " must have " +
                              std::to_string(cols) + " entries");
        for (Index k = 0; k < cols; ++k) {
            const json& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) throw DomainError(std::string(name) + " entries must be numbers");
            m(i, k) = v.get<double>();
        }
    }
    return m;
}

json system_to_json(const System& system, const Matrix& omega) {
    return json{{"n", system.n()},
                {"s", system.s()},
                {"A", matrix_to_json(system.a)},
                {"B", matrix_to_json(system.b)},
                {"C", matrix_to_json(system.c)},
                {"omega", matrix_to_json(omega)}};
}

json model_to_json(const StateSpaceModel& model) { return system_to_json(model.system(), model.omega()); }

StateSpaceModel model_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("model must be a JSON object");
    for (const char* key : {"n", "s", "A", "B", "C", "omega"})
        if (!j.contains(key)) throw DomainError(std::string("model is missing field '") + key + "'");
    if (!j["n"].is_number_integer() || !j["s"].is_number_integer())
        throw DomainError("model fields n and s must be integers");
    const Index n = j["n"].get<Index>();
    const Index s = j["s"].get<Index>();
    if (n < 0 || s < 1) throw DomainError("model needs n >= 0 and s >= 1");
    return StateSpaceModel(matrix_from_json(j["A"], n, n, "A"), matrix_from_json(j["B"], n, s, "B"),
                           matrix_from_json(j["C"], s, n, "C"), matrix_from_json(j["omega"], s, s, "omega"));
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DomainError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

StateSpaceModel read_model_file(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace cvaod
