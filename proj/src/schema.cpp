#include "newsrank/schema.hpp"

#include <cmath>

namespace newsrank {

namespace {

bool has_type(const nlohmann::json& v, const std::string& type) {
    if (type == "null") return v.is_null();
    if (type == "boolean") return v.is_boolean();
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "number") return v.is_number();
    if (type == "integer") {
        if (v.is_number_integer()) return true;
        return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
    }
    return false;
}

class Validator {
public:
    explicit Validator(const nlohmann::json& root) : root_(root) {}

    void check(const nlohmann::json& schema, const nlohmann::json& v, const std::string& at,
               std::vector<std::string>& errors) const {
        if (schema.is_boolean()) {
            if (!schema.get<bool>()) errors.push_back(at + ": not allowed");
            return;
        }
        if (const auto ref = schema.find("$ref"); ref != schema.end()) {
            check(resolve(ref->get<std::string>()), v, at, errors);
            return;
        }
        if (const auto t = schema.find("type"); t != schema.end()) {
            bool ok = false;
            if (t->is_string()) {
                ok = has_type(v, t->get<std::string>());
            } else {
                for (const auto& alt : *t) ok = ok || has_type(v, alt.get<std::string>());
            }
            if (!ok) {
                errors.push_back(at + ": expected type " + t->dump());
                return;
            }
        }
        if (const auto e = schema.find("enum"); e != schema.end()) {
            bool ok = false;
            for (const auto& option : *e) ok = ok || option == v;
            if (!ok) errors.push_back(at + ": value not in enum");
        }
        if (const auto c = schema.find("const"); c != schema.end() && *c != v) {
            errors.push_back(at + ": expected " + c->dump());
        }
        if (v.is_number()) {
            const double x = v.get<double>();
            if (const auto m = schema.find("minimum"); m != schema.end() && x < m->get<double>()) {
                errors.push_back(at + ": below minimum " + m->dump());
            }
            if (const auto m = schema.find("maximum"); m != schema.end() && x > m->get<double>()) {
                errors.push_back(at + ": above maximum " + m->dump());
            }
        }
        if (const auto any = schema.find("anyOf"); any != schema.end()) {
            bool ok = false;
            for (const auto& alt : *any) {
                std::vector<std::string> sub;
                check(alt, v, at, sub);
                if (sub.empty()) {
                    ok = true;
                    break;
                }
            }
            if (!ok) errors.push_back(at + ": matches no alternative");
        }
        if (v.is_object()) check_object(schema, v, at, errors);
        if (v.is_array()) {
            if (const auto m = schema.find("minItems"); m != schema.end() && v.size() < m->get<std::size_t>()) {
                errors.push_back(at + ": fewer than " + m->dump() + " items");
            }
            if (const auto items = schema.find("items"); items != schema.end()) {
                for (std::size_t i = 0; i < v.size(); ++i) {
                    check(*items, v[i], at + "[" + std::to_string(i) + "]", errors);
                }
            }
        }
    }

private:
    void check_object(const nlohmann::json& schema, const nlohmann::json& v, const std::string& at,
                      std::vector<std::string>& errors) const {
        if (const auto req = schema.find("required"); req != schema.end()) {
            for (const auto& key : *req) {
                if (!v.contains(key.get<std::string>())) errors.push_back(at + ": missing " + key.get<std::string>());
            }
        }
        const auto props = schema.find("properties");
        const auto extra = schema.find("additionalProperties");
        for (const auto& [key, value] : v.items()) {
            const std::string child = at + "." + key;
            if (props != schema.end() && props->contains(key)) {
                check((*props)[key], value, child, errors);
            } else if (extra != schema.end()) {
                check(*extra, value, child, errors);
            }
        }
    }

    const nlohmann::json& resolve(const std::string& ref) const {
        static const nlohmann::json reject = false;
        const std::string prefix = "#/definitions/";
        if (ref.rfind(prefix, 0) != 0) return reject;
        const auto defs = root_.find("definitions");
        if (defs == root_.end()) return reject;
        const auto it = defs->find(ref.substr(prefix.size()));
        return it == defs->end() ? reject : *it;
    }

    const nlohmann::json& root_;
};

} // namespace

std::vector<std::string> validate_schema(const nlohmann::json& schema, const nlohmann::json& instance) {
    std::vector<std::string> errors;
    Validator(schema).check(schema, instance, "$", errors);
    return errors;
}

const nlohmann::json& report_schema() {
    static const nlohmann::json schema = nlohmann::json::parse(
#include "report_schema.inc"
    );
    return schema;
}

} // namespace newsrank
