package com.parserkit;

public class Parser {
    private final Lexer lexer;
    private Token current;

    public Parser(Lexer lexer) {
        this.lexer = lexer;
    }

    public Node parse() {
        Node root = new Node();
        current = lexer.next();
        while (!current.is(TokenType.END)) {
            root.add(new TextNode(current.text));
            current = lexer.next();
        }
        return root;
    }
}
