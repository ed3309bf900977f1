#include <doctest.h>

#include "slotgraph/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace slotgraph::corpus;
namespace fs = std::filesystem;

namespace {

std::vector<Bio> bio_of(const std::string& s) {
  std::vector<Bio> out;
  for (char c : s) {
    out.push_back(c == 'O' ? Bio::O : c == 'B' ? Bio::B : Bio::I);
  }
  return out;
}

fs::path write_split(const std::string& name,
                     const std::vector<std::string>& seq_in,
                     const std::vector<std::string>& seq_out,
                     const std::vector<std::string>& label) {
  fs::path dir = fs::temp_directory_path() / ("slotgraph_test_" + name);
  fs::create_directories(dir);
  auto dump = [&](const char* file, const std::vector<std::string>& lines) {
    std::ofstream out(dir / file);
    for (const auto& l : lines) out << l << "\n";
  };
  dump("seq.in", seq_in);
  dump("seq.out", seq_out);
  dump("label", label);
  return dir;
}

// independent reference: paint every tag string directly
std::vector<NamedSpan> reference_spans(const std::vector<std::string>& tags) {
  std::vector<NamedSpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == "O") continue;
    std::string type = tags[i].substr(2);
    bool continues = tags[i][0] == 'I' && !spans.empty() &&
                     spans.back().r == static_cast<int>(i) &&
                     spans.back().type == type && tags[i - 1] != "O";
    if (continues) {
      spans.back().r = static_cast<int>(i) + 1;
    } else {
      spans.push_back(
          NamedSpan{static_cast<int>(i) + 1, static_cast<int>(i) + 1, type});
    }
  }
  return spans;
}

}  // namespace

TEST_CASE("reformulate splits typed tags into plain BIO and spans") {
  auto [bio, spans] =
      reformulate({"O", "B-round_trip", "I-round_trip"});
  CHECK(bio == bio_of("OBI"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == NamedSpan{2, 3, "round_trip"});

  auto [bio2, spans2] = reformulate({"O", "O"});
  CHECK(bio2 == bio_of("OO"));
  CHECK(spans2.empty());

  auto [bio3, spans3] = reformulate({"B-a", "B-b"});
  CHECK(bio3 == bio_of("BB"));
  REQUIRE(spans3.size() == 2);
  CHECK(spans3[0] == NamedSpan{1, 1, "a"});
  CHECK(spans3[1] == NamedSpan{2, 2, "b"});
}

TEST_CASE("reformulate strict mode rejects dangling and switching I") {
  CHECK_THROWS_AS(reformulate({"O", "I-x"}), DanglingI);
  CHECK_THROWS_AS(reformulate({"B-a", "I-b"}), TypeSwitch);
  CHECK_THROWS_AS(reformulate({"X-foo"}), MalformedTag);
  CHECK_THROWS_AS(reformulate({"B"}), MalformedTag);
}

TEST_CASE("reformulate lenient mode promotes bad I to B") {
  auto [bio, spans] = reformulate({"O", "I-x", "I-x"}, true);
  CHECK(bio == bio_of("OBI"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == NamedSpan{2, 3, "x"});

  auto [bio2, spans2] = reformulate({"B-a", "I-b"}, true);
  CHECK(bio2 == bio_of("BB"));
  CHECK(spans2[1].type == "b");
}

TEST_CASE("spans_to_bio paints geometry") {
  CHECK(spans_to_bio({{2, 3, 0}}, 3) == bio_of("OBI"));
  CHECK(spans_to_bio({}, 2) == bio_of("OO"));
  CHECK(spans_to_bio({{1, 1, 0}, {2, 2, 1}}, 2) == bio_of("BB"));
  CHECK_THROWS_AS(spans_to_bio({{1, 3, 0}}, 2), OutOfRange);
  CHECK_THROWS_AS(spans_to_bio({{1, 2, 0}, {2, 3, 1}}, 3), OverlapError);
}

TEST_CASE("round trip: spans -> bio -> typed tags -> spans, random sets") {
  std::mt19937_64 gen(123);
  std::vector<std::string> types = {"a", "b", "c"};
  for (int iter = 0; iter < 300; ++iter) {
    int n = 1 + static_cast<int>(gen() % 12);
    // random non-overlapping sorted spans
    std::vector<Span> spans;
    int pos = 1;
    while (pos <= n) {
      if (gen() % 3 == 0) {
        int len = 1 + static_cast<int>(gen() % 3);
        int r = std::min(n, pos + len - 1);
        spans.push_back(Span{pos, r, static_cast<int>(gen() % 3)});
        pos = r + 2;  // gap keeps adjacent spans distinguishable
      } else {
        ++pos;
      }
    }
    auto bio = spans_to_bio(spans, n);
    std::vector<std::string> tags;
    std::size_t span_idx = 0;
    for (int i = 0; i < n; ++i) {
      if (bio[i] == Bio::O) {
        tags.push_back("O");
      } else {
        if (bio[i] == Bio::B) ++span_idx;
        const std::string& ty = types[spans[span_idx - 1].type];
        tags.push_back((bio[i] == Bio::B ? "B-" : "I-") + ty);
      }
    }
    auto [bio2, named] = reformulate(tags);
    CHECK(bio2 == bio);
    REQUIRE(named.size() == spans.size());
    for (std::size_t k = 0; k < spans.size(); ++k) {
      CHECK(named[k].l == spans[k].l);
      CHECK(named[k].r == spans[k].r);
      CHECK(named[k].type == types[spans[k].type]);
    }
    CHECK(named == reference_spans(tags));
  }
}

TEST_CASE("load_split builds vocab in first-occurrence order") {
  auto dir = write_split(
      "basic",
      {"i want a round trip", "show flights"},
      {"O O O B-round_trip I-round_trip", "O B-what"},
      {"atis_airfare", "atis_flight"});
  auto [ds, vocab] = load_split(dir);
  REQUIRE(ds.samples.size() == 2);
  CHECK(ds.samples[0].slots.spans ==
        std::vector<Span>{{4, 5, 0}});
  CHECK(vocab.intent_names ==
        std::vector<std::string>{"atis_airfare", "atis_flight"});
  CHECK(vocab.slot_type_names ==
        std::vector<std::string>{"round_trip", "what"});
  CHECK(vocab.description("round_trip") == "round trip");

  // determinism: same files, identical result
  auto [ds2, vocab2] = load_split(dir);
  CHECK(vocab2.intent_names == vocab.intent_names);
  CHECK(vocab2.slot_type_names == vocab.slot_type_names);
  CHECK(ds2.samples.size() == ds.samples.size());
  CHECK(ds2.samples[0].slots.bio == ds.samples[0].slots.bio);
  fs::remove_all(dir);
}

TEST_CASE("load_split error cases") {
  auto dir = write_split("mismatch", {"a b"}, {"O O O"}, {"x"});
  CHECK_THROWS_AS((void)load_split(dir), LengthMismatch);
  fs::remove_all(dir);

  dir = write_split("badtag", {"a b c"}, {"O X-foo O"}, {"x"});
  CHECK_THROWS_AS((void)load_split(dir), MalformedTag);
  fs::remove_all(dir);

  dir = write_split("unk", {"a"}, {"O"}, {"new_intent"});
  LabelVocab fixed;
  fixed.intent_names = {"known"};
  fixed.descriptions["known"] = "known";
  CHECK_THROWS_AS((void)load_split(dir, fixed), UnknownLabel);
  fs::remove_all(dir);
}

TEST_CASE("descriptions.tsv overrides defaults") {
  auto dir = write_split("desc", {"a"}, {"B-city"}, {"go"});
  {
    std::ofstream tsv(dir / "descriptions.tsv");
    tsv << "city\tname of a city\n";
  }
  auto [ds, vocab] = load_split(dir);
  CHECK(vocab.description("city") == "name of a city");
  CHECK(vocab.description("go") == "go");
  fs::remove_all(dir);
}
