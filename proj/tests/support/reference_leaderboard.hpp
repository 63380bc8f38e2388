#pragma once

#include <array>
#include <string>
#include <vector>

namespace histostack::testing {

inline const std::array<std::string, 6> kLeaderboardDatasets = {"BHx40", "BHx100", "BHx200", "BHx400", "BHxAll",
                                                               "Bach"};

struct ReferenceRow {
  std::string model;
  std::array<double, 6> accuracy;  // percent, column order as kLeaderboardDatasets
  double weighted_average;
};

// Reference ranking, best first.
inline const std::vector<ReferenceRow> kReferenceLeaderboard = {
    {"Ens 4c", {99.75, 98.90, 99.75, 97.92, 98.91, 95.18}, 97.11},
    {"Ens 3c", {99.75, 98.90, 99.75, 97.81, 98.84, 95.18}, 97.09},
    {"Ens 3a", {99.50, 99.52, 99.50, 97.81, 98.23, 95.18}, 97.05},
    {"Ens 2c", {99.75, 98.47, 99.01, 98.03, 98.19, 95.18}, 96.93},
    {"Ens 3b", {99.50, 99.28, 99.50, 97.81, 98.86, 94.58}, 96.78},
    {"Ens 1c", {99.75, 99.14, 98.96, 98.08, 98.96, 94.58}, 96.78},
    {"Ens 1a", {99.50, 99.28, 98.76, 98.08, 98.74, 94.58}, 96.72},
    {"Ens 2a", {99.50, 98.56, 99.01, 97.26, 98.42, 94.58}, 96.56},
    {"Ens 4a", {99.25, 98.56, 99.50, 97.53, 98.55, 93.37}, 96.03},
    {"DNet", {98.79, 98.99, 99.11, 97.62, 98.29, 93.37}, 95.97},
    {"Ens 1b", {99.75, 99.28, 99.26, 98.63, 98.86, 92.77}, 95.96},
    {"ENet", {99.35, 98.37, 98.26, 96.33, 97.68, 93.86}, 95.93},
    {"Ens 2b", {99.75, 98.80, 99.26, 98.36, 98.61, 92.77}, 95.86},
    {"Ens 4b", {99.75, 99.04, 99.75, 97.81, 98.93, 92.17}, 95.61},
    {"Ens 2d", {99.50, 96.64, 99.01, 97.81, 97.72, 92.77}, 95.45},
    {"Xcep'n", {99.10, 98.61, 98.78, 96.85, 98.15, 92.53}, 95.41},
    {"Incp'n", {98.78, 98.90, 98.83, 96.96, 97.49, 92.29}, 95.24},
    {"Ens 4d", {99.50, 98.08, 99.50, 97.81, 98.61, 91.37}, 95.03},
    {"RNet152", {97.99, 97.65, 97.30, 96.79, 96.17, 92.29}, 94.73},
    {"Ens 3d", {99.50, 98.08, 99.01, 97.81, 98.61, 90.76}, 94.68},
    {"RNet50", {98.30, 98.32, 98.44, 97.23, 96.36, 91.33}, 94.53},
    {"NNMob", {98.75, 98.66, 98.04, 96.96, 98.37, 90.84}, 94.50},
    {"Ens 1d", {99.50, 98.08, 96.77, 97.81, 98.55, 90.76}, 94.45},
    {"Mnet", {99.22, 97.65, 97.42, 96.30, 97.91, 91.08}, 94.39},
};

}  // namespace histostack::testing
