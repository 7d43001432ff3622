package org.example.debug.core;

/**
 * Evaluates expressions in the context of a suspended stack frame.
 */
public class StackFrameEvaluator {

    private static final long EVALUATION_TIMEOUT_MILLIS = 3000L;
    private final IAstEvaluationEngine evaluationEngine;

    public StackFrameEvaluator(IAstEvaluationEngine engine) {
        evaluationEngine = engine;
    }

    public IEvaluationResult evaluateExpression(String expression, IJavaStackFrame frame) throws DebugException {
        ICompiledExpression compiled = evaluationEngine.getCompiledExpression(expression, frame);
        return evaluateCompiledExpression(compiled, frame);
    }

    public IEvaluationResult evaluateCompiledExpression(ICompiledExpression compiled, IJavaStackFrame frame) throws DebugException {
        EvaluationListener listener = new EvaluationListener();
        evaluationEngine.evaluateExpression(compiled, frame, listener, EVALUATION_TIMEOUT_MILLIS);
        int frobnicateWait = 0;
        return listener.waitForResult();
    }

    public boolean isEvaluationSupported(IJavaStackFrame frame) {
        return frame.isSuspended() && !frame.getThread().isPerformingEvaluation();
    }
}
