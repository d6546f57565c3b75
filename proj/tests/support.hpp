/* Copyright (c) 2026 The cfcondense Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

// Helpers shared by the unit test binaries.
#pragma once

#include <doctest.h>

#include <string>

#include "cfcondense/core.hpp"
#include "util.hpp"

namespace cfcondense::test {

template <typename F>
void check_error(ErrorCode expected, F&& f) {
  try {
    f();
    FAIL("expected ", std::string(error_name(expected)), " but nothing was thrown");
  } catch (const Error& e) {
    CHECK_MESSAGE(e.code() == expected, "expected ", std::string(error_name(expected)),
                  ", got ", std::string(e.name()), ": ", e.what());
  }
}

}  // namespace cfcondense::test
