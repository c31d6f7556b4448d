package com.parserkit;

/*
 * Splits source text into word, number, and symbol tokens.
 * Whitespace separates tokens and is never emitted.
 */
public class Lexer {
    private final SourceBuffer buffer;

    public Lexer(SourceBuffer buffer) {
        this.buffer = buffer;
    }

    public Token next() {
        while (!buffer.atEnd() && buffer.peek() == ' ') {
            buffer.advance();
        }
        if (buffer.atEnd()) {
            return new Token(TokenType.END,"", 0);
        }
        if (CharClasses.isDigit(buffer.peek())) {
            return read(TokenType.NUMBER);
        }
        if (CharClasses.isWordStart(buffer.peek())) {
            return read(TokenType.WORD);
        }
        return read(TokenType.SYMBOL);
    }

    private Token read(TokenType type) {
        StringBuilder text = new StringBuilder();
        text.append(buffer.advance());
        return new Token(type, text.toString(), 0);
    }
}
