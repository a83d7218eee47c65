// Copyright 2026 The pevqe Authors
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
#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

namespace pevqe::fixtures {

inline std::string data_path(const std::string &rel) {
    return std::string(PEVQE_DATA_DIR) + "/" + rel;
}

inline std::string fixture_path(const std::string &fixture, const std::string &file) {
    return data_path("fixtures/" + fixture + "/" + file);
}

inline nlohmann::json fixture_manifest(const std::string &fixture) {
    std::ifstream in(fixture_path(fixture, "fixture.json"));
    return nlohmann::json::parse(in);
}

} // namespace pevqe::fixtures
