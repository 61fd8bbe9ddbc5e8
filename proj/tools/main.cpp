#include "cli.hpp"

int main(int argc, char** argv) { return ssl3d::cli::dispatch(argc, argv); }
