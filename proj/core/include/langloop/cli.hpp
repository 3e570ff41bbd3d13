// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace langloop {

// Exit codes:
//   0 success        2 usage error (unknown subcommand/flag)
//   3 bad config     4 missing upstream artifact / unreadable input file
//   5 malformed data 1 any other failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitMissingArtifact = 4;
inline constexpr int kExitBadData = 5;

/// Entry point behind the langloop binary; also callable from tests.
int cli_main(int argc, const char* const* argv);

}  // namespace langloop
