#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace ttk {

class Value;

using ValueList = std::vector<Value>;
// std::map keeps keys unique and sorted by byte order, which is exactly the
// canonical map ordering.
using ValueMap = std::map<std::string, Value>;

// The interchange data domain: null, boolean, 64-bit signed integer, UTF-8
// text, list, and string-keyed map. There is deliberately no floating-point
// variant; decimal quantities travel as strings or scaled integers.
class Value {
public:
    Value() : data_(nullptr) {}
    Value(std::nullptr_t) : data_(nullptr) {}
    Value(bool b) : data_(b) {}
    Value(int64_t i) : data_(i) {}
    Value(int i) : data_(static_cast<int64_t>(i)) {}
    Value(uint32_t i) : data_(static_cast<int64_t>(i)) {}
    Value(const char* s) : data_(std::string(s)) {}
    Value(std::string s) : data_(std::move(s)) {}
    Value(std::string_view s) : data_(std::string(s)) {}
    Value(ValueList l) : data_(std::move(l)) {}
    Value(ValueMap m) : data_(std::move(m)) {}

    bool is_null() const { return std::holds_alternative<std::nullptr_t>(data_); }
    bool is_bool() const { return std::holds_alternative<bool>(data_); }
    bool is_int() const { return std::holds_alternative<int64_t>(data_); }
    bool is_string() const { return std::holds_alternative<std::string>(data_); }
    bool is_list() const { return std::holds_alternative<ValueList>(data_); }
    bool is_map() const { return std::holds_alternative<ValueMap>(data_); }

    bool as_bool() const;
    int64_t as_int() const;
    const std::string& as_string() const;
    const ValueList& as_list() const;
    const ValueMap& as_map() const;
    ValueList& as_list();
    ValueMap& as_map();

    const char* type_name() const;

    friend bool operator==(const Value& a, const Value& b) { return a.data_ == b.data_; }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

private:
    std::variant<std::nullptr_t, bool, int64_t, std::string, ValueList, ValueMap> data_;
};

}  // namespace ttk
