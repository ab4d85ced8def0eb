// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT
#include "disputekit/log.hpp"

#include <doctest.h>

int main(int argc, char** argv) {
    disputekit::log::set_level(disputekit::log::Level::off);
    doctest::Context context(argc, argv);
    return context.run();
}
