package com.parserkit;

public final class CharClasses {
    private CharClasses() {
    }

    public static boolean isWordStart(char c) {
        return Character.isLetter(c) || c == '_';
    }

    public static boolean isWordPart(char c) {
        return Character.isLetterOrDigit(c) || c == '_';
    }

    public static boolean isDigit(char c) {
        return c >= '0' && c <= '9';
    }
}
