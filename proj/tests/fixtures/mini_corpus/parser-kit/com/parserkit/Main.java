package com.parserkit;

public final class Main {
    public static void main(String[] args) {
        SourceBuffer buffer = new SourceBuffer(join(args));
        Parser parser = new Parser(new Lexer(buffer));
        Node root = parser.parse();
        System.out.println(root.size());
    }

    private static String join(String[] parts) {
        StringBuilder builder = new StringBuilder();
        for (int i = 0; i < parts.length; i++) {
            builder.append(parts[i]);
        }
        return builder.toString();
    }
}
