#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crispbench/edgemap.hpp"

namespace crispbench::testing {

struct Point {
  int x = 0;
  int y = 0;
};

/// 8-connected digital line from a to b inclusive.
std::vector<Point> line_points(Point a, Point b);

/// Open polylines that make up an image's "true" boundaries.
struct Scene {
  int width = 0;
  int height = 0;
  std::vector<std::vector<Point>> polylines;
};

Scene random_scene(std::uint64_t seed, int width, int height, int strokes = 8);

/// Renders the scene shifted by (dx, dy), dropping each stroke with
/// probability `drop` (decided by `seed`).
BinaryBoundaryMap render(const Scene& scene, int dx = 0, int dy = 0, double drop = 0.0,
                         std::uint64_t seed = 0);

/// Soft detector output: blurred, jittered boundaries plus sparse clutter.
EdgeProbabilityMap soft_prediction(const Scene& scene, std::uint64_t seed);

/// Map that is 1.0 on `bits` and 0.0 elsewhere.
EdgeProbabilityMap to_probability(const BinaryBoundaryMap& bits);

struct FixtureEntry {
  std::string id;
  EdgeProbabilityMap pred;
  std::vector<BinaryBoundaryMap> gt;
};

/// Realistic-looking images: `annotators` jittered partial annotations per image.
std::vector<FixtureEntry> realistic_fixture(int images, int width, int height, int annotators,
                                            std::uint64_t seed);

/// Predictions equal to thin ground truth shared by every annotator.
std::vector<FixtureEntry> perfect_fixture(int images, int width, int height, int annotators,
                                          std::uint64_t seed);

/// Axis-aligned strokes at least 8 px apart; the prediction is the ground
/// truth moved `shift` pixels perpendicular to every stroke.
std::vector<FixtureEntry> shifted_fixture(int images, int width, int height, int shift,
                                          std::uint64_t seed);

/// Writes PNGs and a manifest.jsonl under dir; returns the manifest path.
std::filesystem::path write_fixture(const std::filesystem::path& dir,
                                    const std::vector<FixtureEntry>& entries,
                                    const std::string& dataset = "synthetic");

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace crispbench::testing
