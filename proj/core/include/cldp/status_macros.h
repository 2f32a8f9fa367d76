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

#ifndef CLDP_STATUS_MACROS_H_
#define CLDP_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define CLDP_CONCAT_INNER_(a, b) a##b
#define CLDP_CONCAT_(a, b) CLDP_CONCAT_INNER_(a, b)

#define CLDP_RETURN_IF_ERROR(expr)            \
  do {                                        \
    if (absl::Status _st = (expr); !_st.ok()) \
      return _st;                             \
  } while (0)

#define CLDP_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                                \
  if (!tmp.ok()) return tmp.status();               \
  lhs = std::move(tmp).value()

#define CLDP_ASSIGN_OR_RETURN(lhs, expr) \
  CLDP_ASSIGN_OR_RETURN_IMPL_(CLDP_CONCAT_(_statusor_, __LINE__), lhs, expr)

#endif  // CLDP_STATUS_MACROS_H_
