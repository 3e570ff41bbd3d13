// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/cli.hpp"

int main(int argc, char** argv) { return langloop::cli_main(argc, argv); }
