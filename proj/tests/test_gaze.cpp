// Gaze CSV and slice-trace parsing, plus the displayed-slice step function.

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "volgaze/gaze.hpp"

using namespace volgaze;
using testsupport::TempDir;
using testsupport::spit;

TEST_CASE("gaze CSV accepts reordered and extra columns", "[gaze]") {
  TempDir dir;
  const auto path = dir.file("gaze.csv");
  spit(path,
       "x,t,y,confidence,frame_id\n"
       "100.5,0.0,200.25,0.9,7\n"
       "101,0.033,201,0.8,\n");
  const auto samples = parse_gaze_csv(path);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].t == 0.0);
  CHECK(samples[0].x == 100.5);
  CHECK(samples[0].y == 200.25);
  CHECK(samples[0].frame_id == 7);
  CHECK(samples[1].frame_id == -1);  // empty cell leaves the default
}

TEST_CASE("gaze CSV enforces time order and numeric cells", "[gaze]") {
  TempDir dir;
  const auto path = dir.file("gaze.csv");

  spit(path, "t,x,y\n0,1,2\n0,3,4\n");
  CHECK(parse_gaze_csv(path).size() == 2);  // ties are allowed

  spit(path, "t,x,y\n0.5,1,2\n0.4,3,4\n");
  CHECK_THROWS_WITH(parse_gaze_csv(path), Catch::Matchers::ContainsSubstring("row 3"));

  spit(path, "t,x,y\n-0.1,1,2\n");
  CHECK_THROWS_WITH(parse_gaze_csv(path), Catch::Matchers::ContainsSubstring("negative"));

  spit(path, "t,x,y\n0,oops,2\n");
  CHECK_THROWS_WITH(parse_gaze_csv(path), Catch::Matchers::ContainsSubstring("'x'"));

  spit(path, "t,x\n0,1\n");
  CHECK_THROWS_WITH(parse_gaze_csv(path), Catch::Matchers::ContainsSubstring("t, x, y"));

  spit(path, "");
  CHECK_THROWS_AS(parse_gaze_csv(path), InputError);

  spit(path, "t,x,y\n");
  CHECK(parse_gaze_csv(path).empty());  // header-only file: zero samples, not an error
}

TEST_CASE("slice trace must start at zero, increase, and stay in range", "[gaze]") {
  TempDir dir;
  const auto path = dir.file("trace.csv");

  spit(path, "t,z\n0,3\n1.5,4\n2.25,2\n");
  const SliceTrace tr = parse_slice_trace(path, 10);
  REQUIRE(tr.events.size() == 3);
  CHECK(tr.events[1].z == 4);

  spit(path, "t,z\n0.5,3\n");
  CHECK_THROWS_WITH(parse_slice_trace(path, 10),
                    Catch::Matchers::ContainsSubstring("first event"));

  spit(path, "t,z\n0,3\n1,4\n1,5\n");
  CHECK_THROWS_WITH(parse_slice_trace(path, 10),
                    Catch::Matchers::ContainsSubstring("strictly"));

  spit(path, "t,z\n0,10\n");
  CHECK_THROWS_WITH(parse_slice_trace(path, 10),
                    Catch::Matchers::ContainsSubstring("outside"));

  spit(path, "t,z\n");
  CHECK_THROWS_WITH(parse_slice_trace(path, 10),
                    Catch::Matchers::ContainsSubstring("no events"));
}

TEST_CASE("displayed slice is a right-open step function of time", "[gaze]") {
  SliceTrace tr;
  tr.events = {{0.0, 5}, {2.0, 6}, {3.5, 4}};
  CHECK(slice_at(tr, 0.0) == 5);
  CHECK(slice_at(tr, 1.999) == 5);
  CHECK(slice_at(tr, 2.0) == 6);  // at the event time the new slice shows
  CHECK(slice_at(tr, 3.4999) == 6);
  CHECK(slice_at(tr, 3.5) == 4);
  CHECK(slice_at(tr, 1e9) == 4);
  CHECK_THROWS_AS(slice_at(tr, -0.001), InvariantError);
  CHECK_THROWS_AS(slice_at(SliceTrace{}, 0.0), InvariantError);
}
