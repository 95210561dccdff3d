#ifndef DIST235_MODEL_HPP
#define DIST235_MODEL_HPP

// JSON model ingestion and deterministic report construction. A model file
// describes a rank-2 distribution by two coordinate vector fields with
// closed-form coefficient expressions; reports carry the frame basis at each
// point so the cone matrix can be converted back to ambient coordinates.

#include <dist235/cone.hpp>
#include <dist235/quartic.hpp>

#include <json.hpp>

#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dist235 {

using Json = nlohmann::ordered_json;

class model_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelFile {
    std::string name;
    std::vector<std::string> coordinates; // the five base-chart names, echoed in reports
    Distribution distribution;
    std::vector<Point> points;          // optional sample points
    std::map<std::string, bool> expect; // optional expected verdict flags
};

namespace detail {

// Coordinate names share the expression grammar's identifier shape and must
// not shadow the fiber variables or the built-in function names.
inline bool valid_coordinate_name(const std::string& s) {
    if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
    for (const char ch : s)
        if (!((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9'))) return false;
    return s != "u4" && s != "u5" && s != "sin" && s != "cos" && s != "exp";
}

inline VectorField parse_field(const Json& doc, const char* key,
                               const std::vector<std::string>& names) {
    if (!doc.contains(key) || !doc[key].is_array() || doc[key].size() != 5)
        throw model_error(std::string("field '") + key +
                          "' must be an array of 5 expression strings");
    VectorField v;
    v.dim = 5;
    v.comp.reserve(5);
    for (int i = 0; i < 5; ++i) {
        const Json& entry = doc[key][i];
        if (!entry.is_string())
            throw model_error(std::string(key) + "[" + std::to_string(i) +
                              "] must be an expression string");
        try {
            v.comp.push_back(parse_expression(entry.get<std::string>(), names));
        } catch (const parse_error& e) {
            throw model_error(std::string(key) + "[" + std::to_string(i) + "]: " + e.what());
        }
    }
    return v;
}

} // namespace detail

inline ModelFile parse_model(const Json& doc) {
    if (!doc.is_object()) throw model_error("model document must be a JSON object");
    ModelFile m;

    if (!doc.contains("name") || !doc["name"].is_string())
        throw model_error("field 'name' must be a string");
    m.name = doc["name"].get<std::string>();

    if (!doc.contains("coordinates") || !doc["coordinates"].is_array() ||
        doc["coordinates"].size() != 5)
        throw model_error("field 'coordinates' must be an array of 5 names");
    for (const Json& entry : doc["coordinates"]) {
        if (!entry.is_string() || !detail::valid_coordinate_name(entry.get<std::string>()))
            throw model_error("coordinate names must be lowercase identifiers distinct "
                              "from u4, u5 and the function names");
        m.coordinates.push_back(entry.get<std::string>());
    }
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j)
            if (m.coordinates[i] == m.coordinates[j])
                throw model_error("duplicate coordinate name '" + m.coordinates[i] + "'");

    m.distribution = Distribution(detail::parse_field(doc, "X1", m.coordinates),
                                  detail::parse_field(doc, "X2", m.coordinates));

    if (doc.contains("points")) {
        if (!doc["points"].is_array()) throw model_error("field 'points' must be an array");
        for (const Json& entry : doc["points"]) {
            if (!entry.is_array() || entry.size() != 5)
                throw model_error("each point must be an array of 5 numbers");
            Point p;
            for (const Json& coord : entry) {
                if (!coord.is_number()) throw model_error("point coordinates must be numbers");
                p.push_back(coord.get<double>());
            }
            m.points.push_back(std::move(p));
        }
    }

    if (doc.contains("expect")) {
        if (!doc["expect"].is_object()) throw model_error("field 'expect' must be an object");
        for (const auto& [key, value] : doc["expect"].items()) {
            if (!value.is_boolean()) throw model_error("expect flags must be booleans");
            m.expect[key] = value.get<bool>();
        }
    }
    return m;
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw model_error("cannot open model file: " + path);
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw model_error(path + ": " + e.what());
    }
    try {
        return parse_model(doc);
    } catch (const model_error& e) {
        throw model_error(path + ": " + e.what());
    }
}

// ------------------------------------------------------------- reporting ---

inline Json json_point(const Point& p) {
    Json out = Json::array();
    for (const double v : p) out.push_back(v);
    return out;
}

inline Json json_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

inline Json json_signature(const Signature& s) { return Json{s.positive, s.negative, s.zero}; }

// frame_basis[k] lists the ambient components of the (k+1)-th frame field at
// q; the cone matrix is expressed in this basis.
inline Json json_frame_basis(const AdaptedFrame& f, const Point& q) {
    const Eigen::Matrix<double, 5, 5> m = frame_matrix_at(f, q);
    Json out = Json::array();
    for (int k = 0; k < 5; ++k) {
        Json column = Json::array();
        for (int r = 0; r < 5; ++r) column.push_back(m(r, k));
        out.push_back(std::move(column));
    }
    return out;
}

} // namespace dist235

#endif
