package com.parserkit;

public enum TokenType {
    WORD, NUMBER, SYMBOL, END;
}
