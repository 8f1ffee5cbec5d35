#include "gwspeed/harness.hpp"

int main(int argc, char** argv) { return gwspeed::cli_main(argc, argv); }
