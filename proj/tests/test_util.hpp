#pragma once

#include <gtest/gtest.h>

#include "ragda/error.hpp"

#define EXPECT_ERROR_CODE(statement, expected_code)                                  \
  do {                                                                               \
    try {                                                                            \
      statement;                                                                     \
      ADD_FAILURE() << "expected " << ragda::to_string(expected_code) << ", nothing thrown"; \
    } catch (const ragda::Error& e) {                                                \
      EXPECT_EQ(e.code(), expected_code) << e.what();                                \
    }                                                                                \
  } while (0)
