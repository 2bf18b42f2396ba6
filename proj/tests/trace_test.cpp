#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "ttk/canonical.hpp"
#include "ttk/errors.hpp"
#include "ttk/identity.hpp"
#include "ttk/io.hpp"
#include "ttk/trace.hpp"

#include "test_util.hpp"

using namespace ttk;
using ttk_test::TempDir;

namespace {

KeyPair test_keypair(uint8_t fill = 1) {
    std::array<uint8_t, 32> seed{};
    seed.fill(fill);
    return generate_keypair(seed);
}

LogEntry make_entry(TraceLog& log, const KeyPair& kp, int64_t ts_ms,
                    std::vector<EntryRef> refs = {}) {
    ValueMap params;
    params["n"] = static_cast<int64_t>(log.size() + 1);
    ValueMap ctx;
    ctx["jurisdiction"] = "US";
    LogEntry e = log.build_entry(digest("policy"), "demo-action", std::move(params), ts_ms,
                                 std::move(ctx), {digest("in")}, {digest("out")},
                                 std::move(refs), "routine");
    return seal_entry(std::move(e), kp);
}

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::io_failure;
}

std::string error_text(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("expected an Error");
    return "";
}

}  // namespace

TEST_CASE("build_entry follows the chain tail") {
    KeyPair kp = test_keypair();
    TraceLog log{did_for(kp.public_key)};

    LogEntry first = log.build_entry(digest("p"), "a", {}, 100, {}, {}, {}, {}, "routine");
    CHECK(first.v == 1);
    CHECK(first.seq == 1);
    CHECK(first.prev.is_zero());
    CHECK(first.hash.is_zero());  // unsealed

    log.append(seal_entry(first, kp));
    LogEntry second = log.build_entry(digest("p"), "a", {}, 200, {}, {}, {}, {}, "routine");
    CHECK(second.seq == 2);
    CHECK(second.prev == log.back().hash);

    CHECK(code_of([&] {
        log.build_entry(digest("p"), "a", {}, 99, {}, {}, {}, {}, "routine");
    }) == Errc::non_monotonic_timestamp);
}

TEST_CASE("seal_entry signs and hashes; foreign keys are refused") {
    KeyPair kp = test_keypair();
    TraceLog log{did_for(kp.public_key)};
    LogEntry e = make_entry(log, kp, 100);

    CHECK(e.hash == entry_hash(e));
    CHECK(verify_signature(kp.public_key, entry_signing_text(e), e.sig));

    KeyPair other = test_keypair(9);
    LogEntry raw = log.build_entry(digest("p"), "a", {}, 200, {}, {}, {}, {}, "routine");
    CHECK(code_of([&] { seal_entry(raw, other); }) == Errc::key_mismatch);
}

TEST_CASE("signing preimage drops sig and hash; hash preimage drops hash") {
    KeyPair kp = test_keypair();
    TraceLog log{did_for(kp.public_key)};
    LogEntry e = make_entry(log, kp, 100);

    ValueMap signing = parse_value(entry_signing_text(e)).as_map();
    CHECK_FALSE(signing.count("sig"));
    CHECK_FALSE(signing.count("hash"));

    ValueMap hashing = parse_value(entry_hash_text(e)).as_map();
    CHECK(hashing.count("sig"));
    CHECK_FALSE(hashing.count("hash"));
    CHECK(entry_hash(e) == digest(entry_hash_text(e)));

    ValueMap full = entry_value(e).as_map();
    CHECK(full.count("sig"));
    CHECK(full.count("hash"));
}

TEST_CASE("append validates the complete entry") {
    KeyPair kp = test_keypair();
    TraceLog log{did_for(kp.public_key)};
    log.append(make_entry(log, kp, 100));
    LogEntry good = make_entry(log, kp, 200);

    LogEntry e = good;
    e.seq = 4;
    CHECK(code_of([&] { log.append(e); }) == Errc::seq_gap);

    e = good;
    e.prev = digest("elsewhere");
    CHECK(code_of([&] { log.append(e); }) == Errc::chain_break);

    e = good;
    e.ts_ms = 50;
    CHECK(code_of([&] { log.append(e); }) == Errc::non_monotonic_timestamp);

    e = good;
    e.params["n"] = 99;  // content changed after sealing
    CHECK(code_of([&] { log.append(e); }) == Errc::hash_mismatch);

    e = good;
    e.sig[3] ^= 0x01;
    e.hash = entry_hash(e);  // keep the hash honest so only the signature is wrong
    CHECK(code_of([&] { log.append(e); }) == Errc::bad_signature);

    e = good;
    e.agent = did_for(test_keypair(9).public_key);
    CHECK_THROWS_AS(log.append(e), Error);

    log.append(good);
    CHECK(log.size() == 2);
}

TEST_CASE("entry values round trip") {
    KeyPair kp = test_keypair();
    TraceLog log{did_for(kp.public_key)};
    std::vector<EntryRef> refs{{did_for(test_keypair(9).public_key), 3, digest("r")}};
    LogEntry e = make_entry(log, kp, 100, refs);

    LogEntry back = entry_from_value(entry_value(e));
    CHECK(back == e);
    CHECK(back.refs == refs);
    CHECK(back.inputs == e.inputs);

    ValueMap m = entry_value(e).as_map();
    m.erase("action");
    CHECK(code_of([&] { entry_from_value(Value(m)); }) == Errc::parse_error);
    m = entry_value(e).as_map();
    m["extra"] = 1;
    CHECK(code_of([&] { entry_from_value(Value(m)); }) == Errc::parse_error);
    m = entry_value(e).as_map();
    m["seq"] = "1";
    CHECK(code_of([&] { entry_from_value(Value(m)); }) == Errc::parse_error);
}

TEST_CASE("traces export one canonical line per entry and import identically") {
    TempDir tmp;
    KeyPair kp = test_keypair();
    TraceLog log{did_for(kp.public_key)};
    for (int i = 1; i <= 5; ++i) log.append(make_entry(log, kp, i * 1'000));

    auto path = tmp / "trace.ttkt";
    size_t written = export_trace(log, path);
    std::string text = read_file(path);
    CHECK(written == text.size());
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    CHECK(text == export_trace_text(log));

    TraceLog back = import_trace(path);
    CHECK(back.agent() == log.agent());
    REQUIRE(back.size() == 5);
    CHECK(back.entries() == log.entries());
    CHECK(export_trace_text(back) == text);
}

TEST_CASE("import revalidates every guarantee with the offending line") {
    TempDir tmp;
    KeyPair kp = test_keypair();
    TraceLog log{did_for(kp.public_key)};
    for (int i = 1; i <= 4; ++i) log.append(make_entry(log, kp, i * 1'000));
    auto path = tmp / "trace.ttkt";
    export_trace(log, path);
    std::string text = read_file(path);
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    REQUIRE(lines.size() == 4);
    auto write_lines = [&](const std::vector<std::string>& ls) {
        std::string out;
        for (const auto& l : ls) {
            out += l;
            out += '\n';
        }
        write_file_atomic(path, out);
    };

    // tamper one character of content inside line 3
    auto tampered = lines;
    size_t pos = tampered[2].find("demo-action");
    REQUIRE(pos != std::string::npos);
    tampered[2][pos] = 'x';
    write_lines(tampered);
    CHECK(code_of([&] { import_trace(path); }) == Errc::hash_mismatch);
    CHECK(error_text([&] { import_trace(path); }).find("line 3") != std::string::npos);

    // drop a middle line: the seq jumps
    auto dropped = lines;
    dropped.erase(dropped.begin() + 1);
    write_lines(dropped);
    CHECK(code_of([&] { import_trace(path); }) == Errc::seq_gap);

    // swap two lines
    auto swapped = lines;
    std::swap(swapped[1], swapped[2]);
    write_lines(swapped);
    CHECK_THROWS_AS(import_trace(path), Error);

    // non-canonical rendering of a valid entry
    auto padded = lines;
    padded[1].insert(padded[1].find(':') + 1, " ");
    write_lines(padded);
    CHECK(code_of([&] { import_trace(path); }) == Errc::parse_error);

    // garbage line
    auto garbage = lines;
    garbage[3] = "{not json";
    write_lines(garbage);
    CHECK(code_of([&] { import_trace(path); }) == Errc::parse_error);
    CHECK(error_text([&] { import_trace(path); }).find("line 4") != std::string::npos);

    // two different agents in one file
    KeyPair other = test_keypair(9);
    TraceLog foreign{did_for(other.public_key)};
    foreign.append(make_entry(foreign, other, 50'000));
    auto mixed = lines;
    mixed.push_back(export_trace_text(foreign).substr(0, export_trace_text(foreign).size() - 1));
    write_lines(mixed);
    CHECK_THROWS_AS(import_trace(path), Error);

    CHECK(code_of([&] { import_trace(tmp / "absent.ttkt"); }) == Errc::io_failure);
}

TEST_CASE("lenient reads keep tampered evidence loadable") {
    TempDir tmp;
    KeyPair kp = test_keypair();
    TraceLog log{did_for(kp.public_key)};
    for (int i = 1; i <= 3; ++i) log.append(make_entry(log, kp, i * 1'000));
    auto path = tmp / "trace.ttkt";
    export_trace(log, path);

    std::string text = read_file(path);
    size_t pos = text.find("demo-action");
    text[pos] = 'x';
    write_file_atomic(path, text);

    CHECK_THROWS_AS(import_trace(path), Error);
    std::vector<LogEntry> entries = read_entries(path);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].action == "xemo-action");
    CHECK(entries[0].hash != entry_hash(entries[0]));  // the audit sees the mismatch
    CHECK(entries[1] == log.entries()[1]);
}

TEST_CASE("empty and missing traces") {
    TempDir tmp;
    KeyPair kp = test_keypair();
    TraceLog log{did_for(kp.public_key)};
    auto path = tmp / "empty.ttkt";
    CHECK(export_trace(log, path) == 0);
    TraceLog back = import_trace(path);
    CHECK(back.empty());
    CHECK(back.agent().empty());  // an empty file names no agent
    CHECK(read_entries(path).empty());
}
