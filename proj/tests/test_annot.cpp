// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "langloop/annot.hpp"
#include "langloop/errors.hpp"

using namespace langloop;

TEST_SUITE("annot") {

TEST_CASE("canonical example") {
  const AnnotatedUtterance u = parse_annot_utt("wake me at [time : nine am]");
  CHECK(u.tokens == std::vector<std::string>{"wake", "me", "at", "nine", "am"});
  CHECK(u.tags == std::vector<std::string>{"O", "O", "O", "B-time", "I-time"});
  CHECK(u.normalized() == "wake me at [time : nine am]");
}

TEST_CASE("span-free utterance is all O") {
  const AnnotatedUtterance u = parse_annot_utt("hello");
  CHECK(u.tokens == std::vector<std::string>{"hello"});
  CHECK(u.tags == std::vector<std::string>{"O"});
}

TEST_CASE("multiple and adjacent spans") {
  const AnnotatedUtterance u =
      parse_annot_utt("[a : x y] [b : z] tail");
  CHECK(u.tokens == std::vector<std::string>{"x", "y", "z", "tail"});
  CHECK(u.tags == std::vector<std::string>{"B-a", "I-a", "B-b", "O"});
  CHECK(u.normalized() == "[a : x y] [b : z] tail");
}

TEST_CASE("whitespace is normalized on render") {
  const AnnotatedUtterance u =
      parse_annot_utt("  wake   me [ time  :  nine ]  ");
  CHECK(u.normalized() == "wake me [time : nine]");
}

TEST_CASE("nested spans are rejected with a position") {
  try {
    parse_annot_utt("[a : x [b : y]]");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 7);
    CHECK(std::string(e.what()).find("nested") != std::string::npos);
  }
}

TEST_CASE("malformed inputs carry positions") {
  CHECK_THROWS_AS(parse_annot_utt("wake ] me"), ParseError);
  CHECK_THROWS_AS(parse_annot_utt("[time : nine"), ParseError);      // unbalanced
  CHECK_THROWS_AS(parse_annot_utt("[time nine am]"), ParseError);    // no separator
  CHECK_THROWS_AS(parse_annot_utt("[ : nine]"), ParseError);         // empty slot
  CHECK_THROWS_AS(parse_annot_utt("at [time : ] nine"), ParseError); // empty span
  CHECK_THROWS_AS(parse_annot_utt("   "), ParseError);               // empty
  try {
    parse_annot_utt("ok [time : nine");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 3);  // the unclosed '['
  }
}

TEST_CASE("render rejects invalid tag sequences") {
  CHECK_THROWS_AS(render_annot_utt({"x"}, {"I-a"}), Error);
  CHECK_THROWS_AS(render_annot_utt({"x", "y"}, {"B-a", "I-b"}), Error);
  CHECK_THROWS_AS(render_annot_utt({"x"}, {"weird"}), Error);
  CHECK_THROWS_AS(render_annot_utt({"x", "y"}, {"O"}), Error);
}

}  // TEST_SUITE
