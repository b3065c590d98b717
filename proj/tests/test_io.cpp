// Copyright 2026 The hvqa Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include <sstream>

#include "hvqa/io.hpp"
#include "hvqa/svg.hpp"

using namespace hvqa;

TEST_CASE("CSV round trip keeps every bit", "[io]") {
    io::Table t;
    t.header = {"name", "count", "value"};
    t.add({std::string("a"), 3LL, 0.1});
    t.add({std::string("b"), -7LL, 1.0 / 3.0});
    t.add({std::string("c"), 0LL, 6.02214076e23});
    io::Metadata meta{"solve", io::fnv1a("x=1"), 42, {{"layers", "7"}}};

    std::stringstream ss;
    io::write_csv(ss, meta, t);
    const auto text = ss.str();
    CHECK(text.rfind("# schema=1\n", 0) == 0);
    CHECK(text.find("# seed=42\n") != std::string::npos);

    const auto back = io::parse_csv(ss);
    CHECK(back.metadata.at("command") == "solve");
    CHECK(back.metadata.at("layers") == "7");
    CHECK(back.metadata.at("config_hash") == io::hex(io::fnv1a("x=1")));
    CHECK(back.header == t.header);
    const auto values = back.numbers("value");
    CHECK(values[1] == 1.0 / 3.0);
    CHECK(values[2] == 6.02214076e23);
    CHECK_THROWS_AS(back.column("missing"), InvalidInput);
    CHECK_THROWS_AS(t.add({1.0}), InvalidInput);
}

TEST_CASE("FNV-1a reference values", "[io]") {
    CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("SVG rendering is a pure function of the data", "[svg]") {
    svg::Plot plot;
    plot.title = "trace <J>";
    plot.logy = true;
    plot.series.push_back({"run", {0, 1, 2, 3}, {1.0, 1e-3, 1e-7, 1e-12}, true, false});
    plot.series.push_back({"ref", {0, 3}, {1.0, 1.0}, false, true});
    const auto a = svg::render(plot);
    const auto b = svg::render(plot);
    CHECK(a == b);
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("trace &lt;J&gt;") != std::string::npos);
    CHECK(a.find("stroke-dasharray") != std::string::npos);
    CHECK(std::count(a.begin(), a.end(), '\n') > 10);
}
