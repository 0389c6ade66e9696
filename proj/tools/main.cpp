#include <iostream>

#include "app.hpp"

int main(int argc, char** argv)
{
    return rlad::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
