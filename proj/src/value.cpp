#include "ttk/value.hpp"

#include "ttk/errors.hpp"

namespace ttk {

namespace {
[[noreturn]] void type_error(const char* want, const char* got) {
    throw Error(Errc::parse_error,
                std::string("expected ") + want + ", got " + got);
}
}  // namespace

bool Value::as_bool() const {
    if (!is_bool()) type_error("boolean", type_name());
    return std::get<bool>(data_);
}

int64_t Value::as_int() const {
    if (!is_int()) type_error("integer", type_name());
    return std::get<int64_t>(data_);
}

const std::string& Value::as_string() const {
    if (!is_string()) type_error("string", type_name());
    return std::get<std::string>(data_);
}

const ValueList& Value::as_list() const {
    if (!is_list()) type_error("list", type_name());
    return std::get<ValueList>(data_);
}

const ValueMap& Value::as_map() const {
    if (!is_map()) type_error("map", type_name());
    return std::get<ValueMap>(data_);
}

ValueList& Value::as_list() {
    if (!is_list()) type_error("list", type_name());
    return std::get<ValueList>(data_);
}

ValueMap& Value::as_map() {
    if (!is_map()) type_error("map", type_name());
    return std::get<ValueMap>(data_);
}

const char* Value::type_name() const {
    switch (data_.index()) {
    case 0: return "null";
    case 1: return "boolean";
    case 2: return "integer";
    case 3: return "string";
    case 4: return "list";
    case 5: return "map";
    }
    return "unknown";
}

}  // namespace ttk
