// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "langloop/errors.hpp"
#include "langloop/massive.hpp"
#include "langloop/model.hpp"
#include "support.hpp"

using namespace langloop;

namespace {

const char* kThreeLines =
    R"({"locale":"xx-XX","partition":"train","utt":"wake me at nine am","annot_utt":"wake me at [time : nine am]"}
{"locale":"xx-XX","partition":"dev","utt":"hello","annot_utt":"hello"}
{"locale":"xx-XX","partition":"test","utt":"go to berlin","annot_utt":"go to [place : berlin]"}
)";

}  // namespace

TEST_SUITE("massive") {

TEST_CASE("three-line file lands in the declared partitions") {
  std::istringstream in(kThreeLines);
  const IngestResult result = ingest_massive_stream(in, "hand.jsonl");
  REQUIRE(result.datasets.size() == 1);
  const TaskDataset& ds = result.datasets.at("xx-XX");
  CHECK(ds.train.size() == 1);
  CHECK(ds.valid.size() == 1);
  CHECK(ds.test.size() == 1);
  CHECK(ds.spec.vitality == Vitality::kUnassigned);
  // Sorted slot names: place before time.
  CHECK(result.label_names ==
        std::vector<std::string>{"O", "B-place", "I-place", "B-time", "I-time"});
  // Train tokens enter the vocabulary; "berlin" (test only) maps to unk.
  CHECK(result.token_ids.contains("wake"));
  CHECK(!result.token_ids.contains("berlin"));
  CHECK(ds.test[0].tokens[2] == kUnkTokenId);
  // Gold labels align with the annotation.
  const LabelSchema schema{result.label_names};
  CHECK(ds.train[0].labels ==
        std::vector<int>{0, 0, 0, schema.id_of("B-time"), schema.id_of("I-time")});
}

TEST_CASE("duplicate records are kept") {
  std::istringstream in(
      R"({"locale":"a","partition":"train","utt":"hi","annot_utt":"hi"}
{"locale":"a","partition":"train","utt":"hi","annot_utt":"hi"}
)");
  const IngestResult result = ingest_massive_stream(in, "dup.jsonl");
  CHECK(result.datasets.at("a").train.size() == 2);
}

TEST_CASE("bad annotation names its line") {
  std::istringstream in(
      R"({"locale":"a","partition":"train","utt":"x","annot_utt":"x"}
{"locale":"a","partition":"train","utt":"y","annot_utt":"[b : y"}
)");
  try {
    ingest_massive_stream(in, "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("malformed JSON and unknown partitions are rejected") {
  std::istringstream bad_json("not json\n");
  CHECK_THROWS_AS(ingest_massive_stream(bad_json, "x"), ParseError);
  std::istringstream bad_part(
      R"({"locale":"a","partition":"validation","utt":"x","annot_utt":"x"}
)");
  CHECK_THROWS_AS(ingest_massive_stream(bad_part, "x"), ParseError);
  std::istringstream missing(
      R"({"locale":"a","partition":"train","utt":"x"}
)");
  CHECK_THROWS_AS(ingest_massive_stream(missing, "x"), ParseError);
}

TEST_CASE("missing file maps to IoError") {
  CHECK_THROWS_AS(ingest_massive("/no/such/file.jsonl"), IoError);
}

TEST_CASE("export then ingest round trips content as strings") {
  std::istringstream in(kThreeLines);
  const IngestResult first = ingest_massive_stream(in, "hand.jsonl");
  test::TempDir dir("massive");
  std::vector<TaskDataset> datasets;
  for (const auto& [locale, ds] : first.datasets) datasets.push_back(ds);
  export_jsonl(dir.path() / "out.jsonl", datasets, &first.vocab);
  const IngestResult second = ingest_massive(dir.path() / "out.jsonl");
  const TaskDataset& a = first.datasets.at("xx-XX");
  const TaskDataset& b = second.datasets.at("xx-XX");
  REQUIRE(a.train.size() == b.train.size());
  CHECK(a.train[0].labels == b.train[0].labels);
  CHECK(b.label_names == first.label_names);
}

}  // TEST_SUITE
