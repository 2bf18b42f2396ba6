#include "ttk/canonical.hpp"

#include <sodium.h>

#include <charconv>

#include "ttk/errors.hpp"
#include "ttk/hex.hpp"

namespace ttk {

Digest Digest::from_bytes(std::span<const uint8_t> bytes) {
    if (bytes.size() != kSize) {
        throw Error(Errc::malformed_input, "digest must be exactly 32 bytes");
    }
    Digest d;
    std::copy(bytes.begin(), bytes.end(), d.bytes_.begin());
    return d;
}

Digest Digest::from_hex(std::string_view hex) {
    if (hex.size() != kSize * 2 || !is_lower_hex(hex)) {
        throw Error(Errc::malformed_input, "digest must be 64 lowercase hex characters");
    }
    return from_bytes(ttk::from_hex(hex));
}

std::string Digest::hex() const { return to_hex(bytes_); }

bool Digest::is_zero() const {
    for (uint8_t b : bytes_) {
        if (b != 0) return false;
    }
    return true;
}

Digest digest(std::span<const uint8_t> data) {
    std::array<uint8_t, Digest::kSize> out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return Digest::from_bytes(out);
}

Digest digest(std::string_view data) {
    return digest(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

Digest domain_digest(uint8_t tag, std::initializer_list<std::span<const uint8_t>> parts) {
    crypto_hash_sha256_state state;
    crypto_hash_sha256_init(&state);
    crypto_hash_sha256_update(&state, &tag, 1);
    for (const auto& part : parts) {
        crypto_hash_sha256_update(&state, part.data(), part.size());
    }
    std::array<uint8_t, Digest::kSize> out;
    crypto_hash_sha256_final(&state, out.data());
    return Digest::from_bytes(out);
}

Digest domain_digest(uint8_t tag, std::span<const Digest> parts) {
    crypto_hash_sha256_state state;
    crypto_hash_sha256_init(&state);
    crypto_hash_sha256_update(&state, &tag, 1);
    for (const auto& part : parts) {
        crypto_hash_sha256_update(&state, part.bytes().data(), part.bytes().size());
    }
    std::array<uint8_t, Digest::kSize> out;
    crypto_hash_sha256_final(&state, out.data());
    return Digest::from_bytes(out);
}

// ---------------------------------------------------------------------------
// Canonical encoding

namespace {

void encode_string(std::string& out, std::string_view s) {
    static constexpr char kHex[] = "0123456789abcdef";
    out += '"';
    for (char raw : s) {
        auto c = static_cast<unsigned char>(raw);
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (c < 0x20) {
                out += "\\u00";
                out += kHex[c >> 4];
                out += kHex[c & 0x0f];
            } else {
                out += raw;
            }
        }
    }
    out += '"';
}

void encode_value(std::string& out, const Value& v) {
    if (v.is_null()) {
        out += "null";
    } else if (v.is_bool()) {
        out += v.as_bool() ? "true" : "false";
    } else if (v.is_int()) {
        out += std::to_string(v.as_int());
    } else if (v.is_string()) {
        encode_string(out, v.as_string());
    } else if (v.is_list()) {
        out += '[';
        bool first = true;
        for (const Value& item : v.as_list()) {
            if (!first) out += ',';
            first = false;
            encode_value(out, item);
        }
        out += ']';
    } else {
        out += '{';
        bool first = true;
        for (const auto& [key, item] : v.as_map()) {
            if (!first) out += ',';
            first = false;
            encode_string(out, key);
            out += ':';
            encode_value(out, item);
        }
        out += '}';
    }
}

}  // namespace

std::string canonical_text(const Value& v) {
    std::string out;
    encode_value(out, v);
    return out;
}

Bytes canonical_encode(const Value& v) {
    std::string text = canonical_text(v);
    return Bytes(text.begin(), text.end());
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

constexpr int kMaxDepth = 128;

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Value parse_document() {
        Value v = parse(0);
        skip_ws();
        if (pos_ != text_.size()) fail("trailing content after value");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw Error(Errc::parse_error,
                    "offset " + std::to_string(pos_) + ": " + message);
    }

    bool eof() const { return pos_ >= text_.size(); }

    char peek() const {
        if (eof()) fail("unexpected end of input");
        return text_[pos_];
    }

    char take() {
        char c = peek();
        ++pos_;
        return c;
    }

    void expect(char c) {
        if (take() != c) {
            --pos_;
            fail(std::string("expected '") + c + "'");
        }
    }

    void skip_ws() {
        while (!eof()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos_;
            } else {
                break;
            }
        }
    }

    void expect_literal(std::string_view lit) {
        if (text_.substr(pos_, lit.size()) != lit) fail("invalid literal");
        pos_ += lit.size();
    }

    Value parse(int depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        skip_ws();
        char c = peek();
        switch (c) {
        case 'n': expect_literal("null"); return Value(nullptr);
        case 't': expect_literal("true"); return Value(true);
        case 'f': expect_literal("false"); return Value(false);
        case '"': return Value(parse_string());
        case '[': return parse_list(depth);
        case '{': return parse_map(depth);
        default:
            if (c == '-' || (c >= '0' && c <= '9')) return parse_int();
            fail("unexpected character");
        }
    }

    Value parse_int() {
        size_t start = pos_;
        if (peek() == '-') ++pos_;
        size_t digits_start = pos_;
        while (!eof() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        if (pos_ == digits_start) fail("expected digits");
        std::string_view digits = text_.substr(digits_start, pos_ - digits_start);
        if (digits.size() > 1 && digits[0] == '0') fail("leading zeros are not allowed");
        if (!eof()) {
            char next = text_[pos_];
            if (next == '.' || next == 'e' || next == 'E') {
                fail("floating-point numbers are not allowed");
            }
        }
        std::string_view token = text_.substr(start, pos_ - start);
        if (token == "-0") fail("negative zero is not allowed");
        int64_t out = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
        if (ec != std::errc() || ptr != token.data() + token.size()) {
            fail("integer out of 64-bit signed range");
        }
        return Value(out);
    }

    // Validates one UTF-8 sequence starting at the current position with
    // lead byte `lead` (already consumed) and appends it to `out`.
    void take_utf8_tail(std::string& out, unsigned char lead) {
        int len = 0;
        uint32_t cp = 0;
        if ((lead & 0xe0) == 0xc0) {
            len = 1;
            cp = lead & 0x1f;
        } else if ((lead & 0xf0) == 0xe0) {
            len = 2;
            cp = lead & 0x0f;
        } else if ((lead & 0xf8) == 0xf0) {
            len = 3;
            cp = lead & 0x07;
        } else {
            fail("invalid UTF-8 lead byte");
        }
        out += static_cast<char>(lead);
        for (int i = 0; i < len; ++i) {
            if (eof()) fail("truncated UTF-8 sequence");
            auto cont = static_cast<unsigned char>(take());
            if ((cont & 0xc0) != 0x80) fail("invalid UTF-8 continuation byte");
            cp = (cp << 6) | (cont & 0x3f);
            out += static_cast<char>(cont);
        }
        static constexpr uint32_t kMinForLen[] = {0, 0x80, 0x800, 0x10000};
        if (cp < kMinForLen[len]) fail("overlong UTF-8 encoding");
        if (cp >= 0xd800 && cp <= 0xdfff) fail("UTF-8 encoded surrogate");
        if (cp > 0x10ffff) fail("code point beyond U+10FFFF");
    }

    std::string parse_string() {
        expect('"');
        std::string out;
        for (;;) {
            if (eof()) fail("unterminated string");
            auto c = static_cast<unsigned char>(take());
            if (c == '"') return out;
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                char esc = take();
                switch (esc) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case '/': out += '/'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                case 't': out += '\t'; break;
                case 'u': {
                    uint32_t cp = 0;
                    for (int i = 0; i < 4; ++i) {
                        char h = take();
                        int nib;
                        if (h >= '0' && h <= '9') nib = h - '0';
                        else if (h >= 'a' && h <= 'f') nib = h - 'a' + 10;
                        else if (h >= 'A' && h <= 'F') nib = h - 'A' + 10;
                        else { --pos_; fail("invalid \\u escape digit"); }
                        cp = (cp << 4) | static_cast<uint32_t>(nib);
                    }
                    // Only ASCII escapes are accepted; non-ASCII text travels
                    // as raw UTF-8 so that escaping stays unambiguous.
                    if (cp >= 0x80) fail("\\u escape above U+007F; use raw UTF-8");
                    out += static_cast<char>(cp);
                    break;
                }
                default:
                    --pos_;
                    fail("invalid escape character");
                }
            } else if (c < 0x20) {
                --pos_;
                fail("unescaped control character in string");
            } else if (c < 0x80) {
                out += static_cast<char>(c);
            } else {
                take_utf8_tail(out, c);
            }
        }
    }

    Value parse_list(int depth) {
        expect('[');
        ValueList items;
        skip_ws();
        if (peek() == ']') {
            ++pos_;
            return Value(std::move(items));
        }
        for (;;) {
            items.push_back(parse(depth + 1));
            skip_ws();
            char c = take();
            if (c == ']') return Value(std::move(items));
            if (c != ',') {
                --pos_;
                fail("expected ',' or ']'");
            }
        }
    }

    Value parse_map(int depth) {
        expect('{');
        ValueMap items;
        skip_ws();
        if (peek() == '}') {
            ++pos_;
            return Value(std::move(items));
        }
        for (;;) {
            skip_ws();
            std::string key = parse_string();
            skip_ws();
            expect(':');
            Value item = parse(depth + 1);
            if (!items.emplace(std::move(key), std::move(item)).second) {
                fail("duplicate map key");
            }
            skip_ws();
            char c = take();
            if (c == '}') return Value(std::move(items));
            if (c != ',') {
                --pos_;
                fail("expected ',' or '}'");
            }
        }
    }

    std::string_view text_;
    size_t pos_ = 0;
};

}  // namespace

Value parse_value(std::string_view text) {
    return Parser(text).parse_document();
}

}  // namespace ttk
