#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ttk/canonical.hpp"
#include "ttk/errors.hpp"
#include "ttk/hex.hpp"
#include "ttk/value.hpp"

using namespace ttk;

namespace {

// Pinned SHA-256 vectors, independently recomputed before being frozen here.
constexpr const char* kEmptySha = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";
constexpr const char* kAbcSha = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad";
constexpr const char* kZeroByteSha = "6e340b9cffb37a989ca544e6bb780a2c78901d3fb33738768511a30617afa01d";

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::io_failure;
}

}  // namespace

TEST_CASE("sha256 matches pinned vectors") {
    CHECK(digest("").hex() == kEmptySha);
    CHECK(digest("abc").hex() == kAbcSha);
    uint8_t zero = 0;
    CHECK(digest(std::span<const uint8_t>(&zero, 1)).hex() == kZeroByteSha);
}

TEST_CASE("domain digests separate hash domains by tag byte") {
    Digest h = Digest::from_hex(std::string(64, 'a'));
    std::vector<Digest> parts{h};
    CHECK(domain_digest(tag::kMerkleLeaf, parts).hex() ==
          "e0bb82791bae3c50bd9c20fa4ccdcb8064a56e5c12bc69b07e6712ac9b4429e6");
    CHECK(domain_digest(tag::kMerkleInterior, parts).hex() ==
          "b2642d0c3bfa93efe38e99e824962f54343302c923765271c6e99dfcbe43cc91");
    CHECK(domain_digest(tag::kMerkleLeaf, parts) != domain_digest(tag::kMerkleInterior, parts));
    // tag || part concatenation, nothing else
    Bytes manual{0x00};
    manual.insert(manual.end(), h.bytes().begin(), h.bytes().end());
    CHECK(domain_digest(tag::kMerkleLeaf, parts) == digest(manual));
}

TEST_CASE("hex round trip and strictness") {
    Bytes b{0x00, 0x7f, 0xff, 0x10};
    CHECK(to_hex(b) == "007fff10");
    CHECK(from_hex("007fff10") == b);
    CHECK(from_hex("").empty());
    CHECK(code_of([] { from_hex("0"); }) == Errc::malformed_input);
    CHECK(code_of([] { from_hex("AB"); }) == Errc::malformed_input);   // uppercase
    CHECK(code_of([] { from_hex("0g"); }) == Errc::malformed_input);
    CHECK(is_lower_hex("00ff"));
    CHECK_FALSE(is_lower_hex("00FF"));
}

TEST_CASE("digest hex round trip, zero, ordering") {
    Digest d = Digest::from_hex(kAbcSha);
    CHECK(d.hex() == kAbcSha);
    CHECK_FALSE(d.is_zero());
    CHECK(Digest::zero().is_zero());
    CHECK(Digest::zero().hex() == std::string(64, '0'));
    CHECK(code_of([] { Digest::from_hex("ab"); }) == Errc::malformed_input);
    CHECK(code_of([] { Digest::from_hex(std::string(64, 'G')); }) == Errc::malformed_input);
    CHECK(Digest::zero() < d);
}

TEST_CASE("canonical text sorts map keys by UTF-8 byte order") {
    ValueMap m;
    m["b"] = 1;
    m["a"] = 2;
    m["aa"] = 3;
    m["Z"] = 4;  // 0x5a sorts before lowercase
    CHECK(canonical_text(Value(m)) == R"({"Z":4,"a":2,"aa":3,"b":1})");

    ValueMap u;
    u["\xc3\xa9"] = 1;  // é: multi-byte sorts after all ASCII
    u["z"] = 2;
    CHECK(canonical_text(Value(u)) == "{\"z\":2,\"\xc3\xa9\":1}");
}

TEST_CASE("canonical text has no whitespace and minimal escapes") {
    ValueMap m;
    m["s"] = "a\"b\\c\nd\re\tf\x01g";
    m["l"] = ValueList{Value(nullptr), Value(true), Value(false), Value(int64_t{-7})};
    CHECK(canonical_text(Value(m)) ==
          "{\"l\":[null,true,false,-7],\"s\":\"a\\\"b\\\\c\\nd\\re\\tf\\u0001g\"}");
    // non-ASCII travels raw, never escaped
    CHECK(canonical_text(Value("caf\xc3\xa9")) == "\"caf\xc3\xa9\"");
}

TEST_CASE("canonical text covers the int64 extremes") {
    CHECK(canonical_text(Value(INT64_MIN)) == "-9223372036854775808");
    CHECK(canonical_text(Value(INT64_MAX)) == "9223372036854775807");
    CHECK(parse_value("-9223372036854775808").as_int() == INT64_MIN);
    CHECK(parse_value("9223372036854775807").as_int() == INT64_MAX);
}

TEST_CASE("parser accepts whitespace and any key order") {
    Value v = parse_value("  { \"b\" : 1 ,\n\t\"a\" : [ 1 , 2 ] }  ");
    CHECK(canonical_text(v) == R"({"a":[1,2],"b":1})");
}

TEST_CASE("parser accepts the escape shorthands and ascii \\u escapes") {
    CHECK(parse_value(R"("AZ")").as_string() == "AZ");  // hex case-insensitive
    CHECK(parse_value(R"("\/\b\f\n\r\t")").as_string() == "/\b\f\n\r\t");
}

TEST_CASE("parser rejects what the value domain excludes") {
    auto rejects = [](const std::string& text) {
        CHECK(code_of([&] { parse_value(text); }) == Errc::parse_error);
    };
    rejects("1.5");                      // no floats
    rejects("1e3");
    rejects("-0.0");
    rejects("NaN");
    rejects("01");                       // no leading zeros
    rejects("-");
    rejects("+1");
    rejects("9223372036854775808");      // int64 overflow
    rejects("-9223372036854775809");
    rejects(R"({"a":1,"a":2})");         // duplicate keys
    rejects("{} trailing");
    rejects("[1,2");
    rejects(R"({"a")");
    rejects("[1,]");
    rejects(R"("\x41")");                // bad escape
    rejects("\"\\u00e9\"");              // non-ascii escape: must be raw UTF-8
    rejects("\"a\nb\"");                 // unescaped control char
    rejects("\"\xff\"");                 // invalid UTF-8
    rejects("\"\xc3(\"");                // truncated UTF-8 tail
    rejects("tru");
    rejects("");
}

TEST_CASE("parse errors carry a byte offset") {
    try {
        parse_value(R"({"a": 1.5})");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::parse_error);
        CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
}

TEST_CASE("distinct values encode to distinct bytes") {
    CHECK(canonical_text(Value(1)) != canonical_text(Value("1")));
    CHECK(canonical_text(Value(ValueList{})) != canonical_text(Value(ValueMap{})));
    CHECK(canonical_text(Value(nullptr)) != canonical_text(Value(false)));
}

namespace {

Value random_value(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> kind(0, depth > 0 ? 5 : 3);
    switch (kind(rng)) {
        case 0: return Value(nullptr);
        case 1: return Value(static_cast<bool>(rng() & 1));
        case 2: return Value(static_cast<int64_t>(rng()));
        case 3: {
            std::uniform_int_distribution<int> len(0, 12);
            std::string s;
            int n = len(rng);
            for (int i = 0; i < n; ++i) {
                // bytes from the printable range plus escapes plus UTF-8 pairs
                switch (rng() % 5) {
                    case 0: s += static_cast<char>('a' + rng() % 26); break;
                    case 1: s += '"'; break;
                    case 2: s += '\\'; break;
                    case 3: s += static_cast<char>(rng() % 0x20); break;
                    default: s += "\xc3\xa9"; break;
                }
            }
            return Value(std::move(s));
        }
        case 4: {
            ValueList l;
            std::uniform_int_distribution<int> len(0, 4);
            int n = len(rng);
            for (int i = 0; i < n; ++i) l.push_back(random_value(rng, depth - 1));
            return Value(std::move(l));
        }
        default: {
            ValueMap m;
            std::uniform_int_distribution<int> len(0, 4);
            int n = len(rng);
            for (int i = 0; i < n; ++i)
                m["k" + std::to_string(rng() % 100)] = random_value(rng, depth - 1);
            return Value(std::move(m));
        }
    }
}

}  // namespace

TEST_CASE("random values round-trip byte-identically") {
    std::mt19937_64 rng(20240817);
    for (int i = 0; i < 2000; ++i) {
        Value v = random_value(rng, 3);
        std::string text = canonical_text(v);
        Value back = parse_value(text);
        CHECK(back == v);
        CHECK(canonical_text(back) == text);
        CHECK(canonical_encode(v) == Bytes(text.begin(), text.end()));
    }
}

TEST_CASE("nested document round-trips through a non-canonical rendering") {
    std::string canon =
        R"({"agent":"did:ttk:00","refs":[{"seq":1},{"seq":2}],"tags":["x","y"],"v":1})";
    std::string loose =
        "{ \"v\": 1, \"tags\": [\"x\", \"y\"],\n  \"refs\": [ {\"seq\":1}, {\"seq\":2} ],"
        " \"agent\": \"did:ttk:00\" }";
    CHECK(canonical_text(parse_value(loose)) == canon);
    CHECK(canonical_text(parse_value(canon)) == canon);
}
