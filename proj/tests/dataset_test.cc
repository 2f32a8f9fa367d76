//
// Copyright 2026 The CLDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "cldp/dataset.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cldp/linalg.h"
#include "gtest/gtest.h"

namespace cldp {
namespace {

std::string TempPath(const std::string& name) {
  return (std::filesystem::path(::testing::TempDir()) / name).string();
}

void ExpectSameData(const Dataset& a, const Dataset& b) {
  ASSERT_EQ(a.dim, b.dim);
  ASSERT_EQ(a.num_clients(), b.num_clients());
  for (std::size_t i = 0; i < a.clients.size(); ++i) {
    EXPECT_EQ(a.clients[i].client_id, b.clients[i].client_id);
    ASSERT_EQ(a.clients[i].points.size(), b.clients[i].points.size());
    for (std::size_t j = 0; j < a.clients[i].points.size(); ++j) {
      EXPECT_EQ(a.clients[i].points[j].features,
                b.clients[i].points[j].features);
      EXPECT_EQ(a.clients[i].points[j].label, b.clients[i].points[j].label);
    }
  }
}

TEST(SyntheticTest, ShapeAndNormalization) {
  Vec planted;
  const Dataset data = GenerateSynthetic({7, 4, 5, 3.0, 11}, &planted);
  EXPECT_TRUE(data.Validate().ok());
  EXPECT_EQ(data.num_clients(), 7);
  EXPECT_EQ(data.points_per_client(), 4);
  EXPECT_NEAR(NormP(planted, 2.0), 3.0, 1e-12);
  for (const auto& c : data.clients) {
    for (const auto& p : c.points) {
      EXPECT_NEAR(NormP(p.features, 2.0), 1.0, 1e-12);
      EXPECT_TRUE(p.label == 1.0 || p.label == -1.0);
    }
  }
}

TEST(SyntheticTest, SeedDeterminesData) {
  ExpectSameData(GenerateSynthetic({5, 3, 4, 2.0, 9}),
                 GenerateSynthetic({5, 3, 4, 2.0, 9}));
  const Dataset a = GenerateSynthetic({5, 3, 4, 2.0, 9});
  const Dataset b = GenerateSynthetic({5, 3, 4, 2.0, 10});
  EXPECT_NE(a.clients[0].points[0].features, b.clients[0].points[0].features);
}

TEST(SyntheticTest, LabelsFollowPlantedModel) {
  Vec planted;
  const Dataset data = GenerateSynthetic({200, 50, 3, 4.0, 2}, &planted);
  double agree = 0, expected = 0;
  for (const auto& c : data.clients) {
    for (const auto& p : c.points) {
      const double z = Dot(planted, p.features);
      expected += 1.0 / (1.0 + std::exp(-std::abs(z)));
      agree += (z * p.label > 0);
    }
  }
  const double n = 200 * 50;
  EXPECT_NEAR(agree / n, expected / n, 5 * std::sqrt(0.25 / n));
}

TEST(DatasetIoTest, BinaryRoundTrip) {
  const Dataset data = GenerateSynthetic({6, 3, 4, 2.0, 1});
  const std::string path = TempPath("data.bin");
  ASSERT_TRUE(WriteDatasetBinary(data, path).ok());
  ExpectSameData(ReadDatasetBinary(path).value(), data);
  ExpectSameData(ReadDataset(path).value(), data);
}

TEST(DatasetIoTest, CsvRoundTrip) {
  const Dataset data = GenerateSynthetic({6, 3, 4, 2.0, 1});
  const std::string path = TempPath("data.csv");
  ASSERT_TRUE(WriteDatasetCsv(data, path).ok());
  ExpectSameData(ReadDatasetCsv(path).value(), data);
  ExpectSameData(ReadDataset(path).value(), data);
}

TEST(DatasetIoTest, RejectsTruncatedAndMissing) {
  const Dataset data = GenerateSynthetic({3, 2, 2, 1.0, 1});
  const std::string path = TempPath("trunc.bin");
  ASSERT_TRUE(WriteDatasetBinary(data, path).ok());
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
  EXPECT_FALSE(ReadDatasetBinary(path).ok());
  EXPECT_FALSE(ReadDataset(TempPath("missing.bin")).ok());
  const std::string bad = TempPath("bad.csv");
  std::ofstream(bad) << "2,1,2\nnot,a,dataset\n";
  EXPECT_FALSE(ReadDatasetCsv(bad).ok());
}

TEST(DatasetTest, ValidateCatchesRaggedData) {
  Dataset data = GenerateSynthetic({3, 2, 2, 1.0, 1});
  data.clients[1].points.pop_back();
  EXPECT_FALSE(data.Validate().ok());
  Dataset nan_data = GenerateSynthetic({3, 2, 2, 1.0, 1});
  nan_data.clients[0].points[0].features[0] = NAN;
  EXPECT_FALSE(nan_data.Validate().ok());
  Dataset ids = GenerateSynthetic({3, 2, 2, 1.0, 1});
  ids.clients[2].client_id = 7;
  EXPECT_FALSE(ids.Validate().ok());
}

}  // namespace
}  // namespace cldp
